#include "evtail/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evtail/error.hpp"
#include "evtail/parallel.hpp"
#include "evtail/stats.hpp"
#include "evtail/strfmt.hpp"

namespace evtail {

namespace {

double prefix_r2(std::span<const double> x, std::span<const double> y,
                 std::span<const double> se, std::size_t end) {
  return noise_floored_r2(x.subspan(0, end + 1), y.subspan(0, end + 1),
                          se.subspan(0, end + 1));
}

}  // namespace

double noise_floored_r2(std::span<const double> x, std::span<const double> y,
                        std::span<const double> se) {
  const LineFit line = fit_line_r2(x, y);
  const double my = mean(y);
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - my) * (v - my);
  if (!(ss_tot > 0.0)) return 1.0;
  const double ss_res = (1.0 - line.r2) * ss_tot;

  // Residual sum of squares that pure estimation noise would produce around
  // the fitted line.  With P the regression hat matrix and Sigma the
  // covariance of the curve points, SS_res of a truly linear mean path is a
  // quadratic form with mean tr((I - P) Sigma) and variance
  // 2 tr(((I - P) Sigma)^2); the floor is its upper 95% point so that a
  // linear-within-noise prefix is rejected at most ~5% of the time.  The
  // points are nested statistics (each deeper threshold reuses a subset of
  // the shallower one's data), for which cov(i, j) equals the variance of
  // the point with the larger sample; se is ordered deep to shallow.
  double floor = 0.0;
  const std::size_t m = y.size();
  if (m > 2) {
    const double mx = mean(x);
    double sxx = 0.0;
    for (double v : x) sxx += (v - mx) * (v - mx);
    const auto var_at = [&](std::size_t i) {
      return std::isfinite(se[i]) ? se[i] * se[i] : 0.0;
    };
    // a = (I - P) Sigma with Sigma_ij = var(point with larger sample).
    std::vector<double> a(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = var_at(std::max(i, j));
        for (std::size_t k = 0; k < m; ++k) {
          const double p_ik = 1.0 / static_cast<double>(m) +
                              (x[i] - mx) * (x[k] - mx) / sxx;
          acc -= p_ik * var_at(std::max(k, j));
        }
        a[i * m + j] = acc;
      }
    double tr_a = 0.0, tr_a2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      tr_a += a[i * m + i];
      for (std::size_t j = 0; j < m; ++j) tr_a2 += a[i * m + j] * a[j * m + i];
    }
    floor = std::max(0.0, tr_a) + 1.645 * std::sqrt(std::max(0.0, 2.0 * tr_a2));
  }
  return 1.0 - std::max(0.0, ss_res - floor) / ss_tot;
}

std::vector<double> threshold_grid(std::span<const double> samples, std::size_t n_points) {
  if (n_points < 2) throw InvalidArgument("threshold_grid: need at least 2 grid points");
  if (samples.size() < 2) throw InsufficientData("threshold_grid: need at least 2 samples");
  const double lo = *std::min_element(samples.begin(), samples.end());
  const double m = mean(samples);
  if (!(m > lo)) throw InvalidArgument("threshold_grid: series has no spread below its mean");
  const double step = (m - lo) / static_cast<double>(n_points);
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    grid[i] = lo + step * static_cast<double>(i + 1);
  grid.back() = m;  // avoid drift past the mean from repeated addition
  return grid;
}

std::vector<double> threshold_grid(const TimeSeries& series, std::size_t n_points) {
  return threshold_grid(series.samples(), n_points);
}

MrlCurve mrl_curve(std::span<const double> samples, std::span<const double> grid,
                   std::size_t k_min) {
  if (grid.empty()) throw InvalidArgument("mrl_curve: empty threshold grid");
  MrlCurve curve;
  for (double u : grid) {
    const std::vector<double> y = excesses(samples, u);
    MrlPoint p{u, 0.0, y.size(), 0.0};
    if (y.size() >= k_min && !y.empty()) {
      p.mean_excess = mean(y);
      if (y.size() >= 2)
        p.se = stddev(y) / std::sqrt(static_cast<double>(y.size()));
      curve.points.push_back(p);
    } else {
      curve.excluded.push_back(p);
    }
  }
  return curve;
}

MrlCurve mrl_curve(const TimeSeries& series, std::span<const double> grid,
                   std::size_t k_min) {
  return mrl_curve(series.samples(), grid, k_min);
}

StabilityCurves stability_curves(std::span<const double> samples,
                                 std::span<const double> grid, std::size_t k_min,
                                 std::size_t n_total, unsigned n_threads) {
  if (grid.empty()) throw InvalidArgument("stability_curves: empty threshold grid");
  struct Cell {
    bool usable = false;
    StabilityPoint point;
    MrlPoint excluded;
    std::string note;
  };
  std::vector<Cell> cells(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const double u = grid[i];
        const std::vector<double> y = excesses(samples, u);
        Cell& c = cells[i];
        if (y.size() < std::max<std::size_t>(k_min, 2)) {
          c.excluded = {u, 0.0, y.size()};
          c.note = strformat("k=%zu below floor %zu", y.size(), k_min);
          return;
        }
        try {
          const GpdFit fit = fit_gpd(y, u, n_total);
          double se_ss = std::numeric_limits<double>::quiet_NaN();
          if (fit.se_available) {
            const double var_ss = fit.se_sigma * fit.se_sigma +
                                  u * u * fit.se_xi * fit.se_xi +
                                  2.0 * u * fit.cov_xi_sigma;
            se_ss = var_ss > 0.0 ? std::sqrt(var_ss) : 0.0;
          }
          c.point = {u,         fit.k, fit.params.xi,
                     fit.se_xi, modified_scale(fit.params),
                     se_ss,     fit.regular};
          c.usable = true;
        } catch (const std::exception& e) {
          c.excluded = {u, 0.0, y.size()};
          c.note = e.what();
        }
      },
      n_threads);
  StabilityCurves curves;
  for (Cell& c : cells) {
    if (c.usable) {
      curves.points.push_back(c.point);
    } else {
      curves.excluded.push_back(c.excluded);
      curves.notes.push_back(std::move(c.note));
    }
  }
  if (curves.points.empty())
    throw EstimationFailure("stability_curves: no grid threshold produced a usable fit");
  return curves;
}

StabilityCurves stability_curves(const TimeSeries& series,
                                 std::span<const double> grid, std::size_t k_min,
                                 unsigned n_threads) {
  return stability_curves(series.samples(), grid, k_min, series.size(), n_threads);
}

ThresholdDecision mrl_threshold(const MrlCurve& curve, double r2_min,
                                std::size_t min_prefix) {
  min_prefix = std::max<std::size_t>(min_prefix, 2);
  if (curve.points.size() < std::max<std::size_t>(min_prefix, 3))
    throw InsufficientData(strformat(
        "mrl_threshold: %zu usable grid points, need at least %zu",
        curve.points.size(), std::max<std::size_t>(min_prefix, 3)));

  std::vector<double> u, e, se;
  u.reserve(curve.points.size());
  e.reserve(curve.points.size());
  se.reserve(curve.points.size());
  for (const MrlPoint& p : curve.points) {
    u.push_back(p.u);
    e.push_back(p.mean_excess);
    se.push_back(p.se);
  }

  ThresholdDecision d;
  d.method = ThresholdMethod::MeanExcess;
  const std::size_t last = u.size() - 1;
  const double full = prefix_r2(u, e, se, last);
  if (full >= r2_min) {
    d.status = ThresholdStatus::Deferred;
    d.r2_mrl = full;
    d.rationale = strformat(
        "mean-excess curve linear over the whole grid (R^2=%.4f); "
        "thresholds indistinguishable by this diagnostic",
        full);
    return d;
  }
  for (std::size_t end = last; end + 1 >= min_prefix; --end) {
    if (end == last) continue;  // full curve already checked above
    const double r2 = prefix_r2(u, e, se, end);
    if (r2 >= r2_min) {
      d.status = ThresholdStatus::Decided;
      d.u0 = u[end];
      d.r2_mrl = r2;
      d.rationale = strformat(
          "mean excess linear for u <= %.6g (%zu points, R^2=%.4f)", u[end],
          end + 1, r2);
      return d;
    }
    if (end == 0) break;
  }
  d.status = ThresholdStatus::Infeasible;
  d.r2_mrl = full;
  d.rationale = "no grid prefix of the mean-excess curve is linear at the requested level";
  return d;
}

ThresholdDecision stability_threshold(const StabilityCurves& curves, double r2_min,
                                      std::size_t min_prefix) {
  min_prefix = std::max<std::size_t>(min_prefix, 2);
  ThresholdDecision d;
  d.method = ThresholdMethod::Stability;
  if (curves.points.size() < min_prefix) {
    d.status = ThresholdStatus::Infeasible;
    d.rationale = strformat("only %zu usable fits on the grid, need %zu",
                             curves.points.size(), min_prefix);
    return d;
  }

  std::vector<double> u, xi, ss, se_xi, se_ss;
  u.reserve(curves.points.size());
  for (const StabilityPoint& p : curves.points) {
    u.push_back(p.u);
    xi.push_back(p.xi);
    ss.push_back(p.sigma_star);
    se_xi.push_back(p.se_xi);
    se_ss.push_back(p.se_sigma_star);
  }

  const std::size_t last = u.size() - 1;
  for (std::size_t end = last; end + 1 >= min_prefix; --end) {
    const double r2x = prefix_r2(u, xi, se_xi, end);
    const double r2s = prefix_r2(u, ss, se_ss, end);
    if (r2x >= r2_min && r2s >= r2_min) {
      d.status = ThresholdStatus::Decided;
      d.u0 = u[end];
      d.r2_xi = r2x;
      d.r2_sigma_star = r2s;
      d.rationale =
          end == last
              ? strformat("shape and adjusted scale stable over the whole grid "
                          "(R^2 xi=%.4f, scale=%.4f)",
                          r2x, r2s)
              : strformat("shape and adjusted scale linear for u <= %.6g "
                          "(%zu points, R^2 xi=%.4f, scale=%.4f)",
                          u[end], end + 1, r2x, r2s);
      return d;
    }
    if (end == 0) break;
  }
  d.status = ThresholdStatus::Infeasible;
  d.rationale =
      "no grid prefix has both shape and adjusted scale linear at the requested level";
  return d;
}

ThresholdSelection select_threshold(const TimeSeries& series,
                                    const ThresholdConfig& config) {
  ThresholdSelection sel;
  const std::size_t lag =
      std::min<std::size_t>(config.iid_max_lag, series.size() > 1 ? series.size() - 1 : 1);
  const IidDiagnostics diag = is_iid(series, lag, config.iid_threshold);
  sel.input_iid = diag.iid;
  if (!diag.iid)
    sel.warning =
        "serial dependence detected in the input; decluster or filter before "
        "relying on the selected threshold";

  const std::vector<double> grid = threshold_grid(series, config.n_points);
  sel.mrl = mrl_curve(series, grid, config.k_min);
  sel.mrl_decision = mrl_threshold(sel.mrl, config.r2_min, config.min_prefix);

  try {
    sel.stability = stability_curves(series, grid, config.k_min, config.n_threads);
    sel.stability_decision =
        stability_threshold(sel.stability, config.r2_min, config.min_prefix);
  } catch (const EstimationFailure& e) {
    sel.stability_decision.status = ThresholdStatus::Infeasible;
    sel.stability_decision.method = ThresholdMethod::Stability;
    sel.stability_decision.rationale = e.what();
  }

  const ThresholdDecision& m = sel.mrl_decision;
  const ThresholdDecision& s = sel.stability_decision;
  ThresholdDecision& out = sel.decision;
  const bool m_dec = m.status == ThresholdStatus::Decided;
  const bool s_dec = s.status == ThresholdStatus::Decided;

  if (m_dec && s_dec) {
    out.status = ThresholdStatus::Decided;
    out.u0 = std::min(*m.u0, *s.u0);
    out.method = ThresholdMethod::Combined;
    out.r2_mrl = m.r2_mrl;
    out.r2_xi = s.r2_xi;
    out.r2_sigma_star = s.r2_sigma_star;
    out.rationale = strformat(
        "both diagnostics decided; taking the deeper threshold %.6g "
        "(mean excess: %.6g; stability: %.6g)",
        *out.u0, *m.u0, *s.u0);
  } else if (m_dec) {
    out = m;
    out.status = ThresholdStatus::Decided;
  } else if (s_dec) {
    out = s;
    out.r2_mrl = m.r2_mrl;
  } else if (m.status == ThresholdStatus::Deferred) {
    // A globally linear mean-excess curve with no stability objection means the
    // tail model holds over the entire scanned range: use the shallowest
    // threshold, which keeps the most exceedances.
    out.status = ThresholdStatus::Decided;
    out.u0 = sel.mrl.points.back().u;
    out.method = ThresholdMethod::MeanExcess;
    out.r2_mrl = m.r2_mrl;
    out.rationale = strformat(
        "mean-excess curve linear over the whole grid and stability scan "
        "inconclusive; using the shallowest scanned threshold %.6g",
        *out.u0);
  } else {
    out.status = ThresholdStatus::Infeasible;
    out.method = ThresholdMethod::None;
    out.r2_mrl = m.r2_mrl;
    out.rationale = strformat("no threshold found (mean excess: %s; stability: %s)",
                               m.rationale.c_str(), s.rationale.c_str());
  }
  if (!sel.warning.empty()) out.rationale += "; " + sel.warning;
  return sel;
}

}  // namespace evtail
