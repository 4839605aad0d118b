#include "evtail/decluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evtail/error.hpp"
#include "evtail/gpd.hpp"
#include "evtail/parallel.hpp"
#include "evtail/stats.hpp"
#include "evtail/strfmt.hpp"
#include "evtail/threshold.hpp"

namespace evtail {

DeclusterResult decluster(std::span<const double> samples, double u, std::size_t r) {
  if (!std::isfinite(u)) throw InvalidArgument("decluster: threshold must be finite");
  DeclusterResult res;
  res.u = u;
  res.r = r;
  res.n_input = samples.size();
  bool open = false;
  ClusterSpan span{};
  double low = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] < u)) continue;
    if (open && i - span.last - 1 <= r) {
      span.last = i;
      low = std::min(low, samples[i]);
    } else {
      if (open) {
        res.spans.push_back(span);
        res.minima.push_back(low);
      }
      open = true;
      span = {i, i};
      low = samples[i];
    }
  }
  if (open) {
    res.spans.push_back(span);
    res.minima.push_back(low);
  }
  return res;
}

DeclusterResult decluster(const TimeSeries& series, double u, std::size_t r) {
  return decluster(series.samples(), u, r);
}

namespace {

struct Cell {
  std::size_t clusters = 0;
  bool ok = false;
  double xi = 0.0;
  double se_xi = 0.0;
  double sigma_star = 0.0;
  double se_sigma_star = 0.0;
  bool iid = false;
  std::string note;
};

Cell evaluate_cell(const TimeSeries& series, double u, std::size_t r,
                   const DeclusterConfig& cfg) {
  Cell cell;
  const DeclusterResult dec = decluster(series, u, r);
  cell.clusters = dec.minima.size();
  if (cell.clusters < std::max<std::size_t>(cfg.k_min, 2)) {
    cell.note = strformat("%zu clusters below floor %zu", cell.clusters, cfg.k_min);
    return cell;
  }
  try {
    // zeta stays relative to the raw series so return periods keep their
    // original time meaning after declustering.
    const GpdFit fit = fit_gpd(excesses(dec.minima, u), u, series.size());
    cell.xi = fit.params.xi;
    cell.se_xi = fit.se_xi;
    cell.sigma_star = modified_scale(fit.params);
    if (fit.se_available) {
      const double var_ss = fit.se_sigma * fit.se_sigma +
                            u * u * fit.se_xi * fit.se_xi +
                            2.0 * u * fit.cov_xi_sigma;
      cell.se_sigma_star = var_ss > 0.0 ? std::sqrt(var_ss) : 0.0;
    } else {
      cell.se_sigma_star = std::numeric_limits<double>::quiet_NaN();
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.note = e.what();
    return cell;
  }
  const TimeSeries minima(dec.minima, series.interval_ms(), series.unit());
  const std::size_t lag = std::min(cfg.iid_max_lag, cell.clusters - 1);
  cell.iid = is_iid(minima, lag, cfg.iid_threshold).iid;
  return cell;
}

}  // namespace

DeclusterSelection select_decluster_params(const TimeSeries& series,
                                           std::span<const double> u_grid,
                                           std::span<const std::size_t> r_grid,
                                           double r2_min,
                                           const DeclusterConfig& config) {
  if (u_grid.empty() || r_grid.empty())
    throw InvalidArgument("select_decluster_params: empty grid");
  if (!(r2_min > 0.0 && r2_min < 1.0))
    throw InvalidArgument("select_decluster_params: r2_min outside (0, 1)");
  std::vector<double> grid(u_grid.begin(), u_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::size_t> rs(r_grid.begin(), r_grid.end());
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

  std::vector<std::vector<Cell>> cells(rs.size(), std::vector<Cell>(grid.size()));
  parallel_for(
      rs.size() * grid.size(),
      [&](std::size_t flat) {
        const std::size_t ri = flat / grid.size();
        const std::size_t ui = flat % grid.size();
        cells[ri][ui] = evaluate_cell(series, grid[ui], rs[ri], config);
      },
      config.n_threads);

  DeclusterSelection sel;
  for (std::size_t ri = 0; ri < rs.size(); ++ri)
    for (std::size_t ui = 0; ui < grid.size(); ++ui) {
      const Cell& c = cells[ri][ui];
      sel.scan.push_back({grid[ui], rs[ri], c.clusters, c.ok, c.xi, c.se_xi,
                          c.sigma_star, c.se_sigma_star, c.iid, c.note});
    }

  std::string trail;
  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    const std::size_t r = rs[ri];
    StabilityCurves curves;
    for (std::size_t ui = 0; ui < grid.size(); ++ui) {
      const Cell& c = cells[ri][ui];
      if (c.ok)
        curves.points.push_back({grid[ui], c.clusters, c.xi, c.se_xi,
                                 c.sigma_star, c.se_sigma_star, true});
    }
    const ThresholdDecision dec = stability_threshold(curves, r2_min, 3);
    if (dec.status != ThresholdStatus::Decided) {
      trail += strformat("r=%zu: no stable threshold; ", r);
      continue;
    }
    const double u0 = *dec.u0;
    const std::size_t ui = static_cast<std::size_t>(
        std::find(grid.begin(), grid.end(), u0) - grid.begin());
    const Cell& c = cells[ri][ui];
    if (!c.iid) {
      trail += strformat("r=%zu: cluster minima at u=%.6g still dependent; ", r, u0);
      continue;
    }
    if (ri + 1 < rs.size()) {
      const Cell& next = cells[ri + 1][ui];
      if (!next.ok) {
        trail += strformat("r=%zu: no fit at the next separation to compare against; ", r);
        continue;
      }
      // Estimates must have stopped moving with r: absolute tolerance for the
      // shape (it sits near zero), relative for the scale.
      const bool xi_stable = std::abs(c.xi - next.xi) <=
                             std::max(config.param_rel_tol,
                                      config.param_rel_tol * std::abs(next.xi));
      const bool ss_stable =
          std::abs(c.sigma_star - next.sigma_star) <=
          config.param_rel_tol * std::max(std::abs(next.sigma_star), 1e-12);
      if (!xi_stable || !ss_stable) {
        trail += strformat("r=%zu: estimates still moving toward r=%zu; ", r, rs[ri + 1]);
        continue;
      }
    }
    sel.found = true;
    sel.u = u0;
    sel.r = r;
    sel.rationale = strformat(
        "smallest separation with independent cluster minima and settled "
        "estimates: r=%zu, u=%.6g (%s)",
        r, u0, dec.rationale.c_str());
    return sel;
  }
  sel.rationale = "no separation/threshold pair qualified: " + trail;
  return sel;
}

}  // namespace evtail
