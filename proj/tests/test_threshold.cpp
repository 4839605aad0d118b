#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "evtail/error.hpp"
#include "evtail/rng.hpp"
#include "evtail/series.hpp"
#include "evtail/stats.hpp"
#include "evtail/synthetic.hpp"
#include "evtail/threshold.hpp"

using namespace evtail;

namespace {

std::vector<double> draw_gpd_lows(std::size_t n, double xi, double sigma,
                                  std::uint64_t seed) {
  const CounterRng rng(stream_key(seed, 8201, 0));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = rng.uniform(i);
    const double y = (std::fabs(xi) < 1e-14)
                         ? -sigma * std::log1p(-p)
                         : sigma / xi * (std::pow(1.0 - p, -xi) - 1.0);
    x[i] = -y;
  }
  return x;
}

// Ordinary least-squares slope, the reference for mean-excess slope checks.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

MrlCurve hand_curve(const std::vector<double>& u, const std::vector<double>& e,
                    double se) {
  MrlCurve c;
  for (std::size_t i = 0; i < u.size(); ++i)
    c.points.push_back(MrlPoint{u[i], e[i], 1000, se});
  return c;
}

StabilityCurves hand_stability(const std::vector<double>& u,
                               const std::vector<double>& xi,
                               const std::vector<double>& ss, double se_xi,
                               double se_ss) {
  StabilityCurves c;
  for (std::size_t i = 0; i < u.size(); ++i)
    c.points.push_back(StabilityPoint{u[i], 1000, xi[i], se_xi, ss[i], se_ss, true});
  return c;
}

}  // namespace

TEST_CASE("threshold grid spans the gap between minimum and mean") {
  const std::vector<double> x{-10.0, -5.0, 0.0, 5.0};  // mean -2.5
  const std::vector<double> g = threshold_grid(x, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() > -10.0);
  CHECK(g.back() == mean(x));
  const double step = g[1] - g[0];
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] - g[i - 1] == doctest::Approx(step).epsilon(1e-12));
  CHECK(g.front() == doctest::Approx(-10.0 + step));

  CHECK_THROWS_AS(threshold_grid(std::vector<double>{1.0, 1.0, 1.0}, 4), InvalidArgument);
}

TEST_CASE("noise-floored R2 reduces to the raw statistic without noise") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<double> y{1.2, 1.9, 3.2, 3.8, 5.3, 5.9};
  const std::vector<double> zero(x.size(), 0.0);
  const double raw = fit_line_r2(x, y).r2;
  CHECK(noise_floored_r2(x, y, zero) == doctest::Approx(raw).epsilon(1e-12));
}

TEST_CASE("noise-floored R2 forgives variation inside the error bars") {
  // A flat curve with wiggles far smaller than the stated uncertainty is a
  // line for every practical purpose.  The bars shrink along the curve the
  // way nested threshold estimates do: each point refines the previous one.
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y(x.size(), 2.0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += (i % 2 ? 0.01 : -0.01);
  const std::vector<double> se{0.80, 0.65, 0.52, 0.45, 0.40, 0.36, 0.33, 0.30};
  CHECK(fit_line_r2(x, y).r2 < 0.5);
  CHECK(noise_floored_r2(x, y, se) == doctest::Approx(1.0));
}

TEST_CASE("noise-floored R2 still flags structure above the noise") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y{0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0};  // hard kink
  const std::vector<double> se(x.size(), 0.01);
  CHECK(noise_floored_r2(x, y, se) < 0.95);
}

TEST_CASE("mean excess of an exponential tail is flat") {
  const std::vector<double> x = draw_gpd_lows(200000, 0.0, 1.5, 5);
  const std::vector<double> grid = threshold_grid(x, 30);
  const MrlCurve c = mrl_curve(x, grid, 2000);
  REQUIRE(c.points.size() >= 10);
  std::vector<double> u, e;
  for (const MrlPoint& p : c.points) {
    u.push_back(p.u);
    e.push_back(p.mean_excess);
    CHECK(p.se > 0.0);
  }
  CHECK(std::fabs(ols_slope(u, e)) <= 0.02);
  CHECK(mean(e) == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("mean excess slope tracks the tail shape") {
  // Lower-tail convention: for GPD(xi) lows the mean excess falls as the
  // threshold rises, with slope -xi/(1 - xi).
  const std::vector<double> x = draw_gpd_lows(200000, 0.2, 1.0, 6);
  const std::vector<double> grid = threshold_grid(x, 30);
  const MrlCurve c = mrl_curve(x, grid, 2000);
  REQUIRE(c.points.size() >= 4);
  std::vector<double> u, e;
  for (const MrlPoint& p : c.points) {
    u.push_back(p.u);
    e.push_back(p.mean_excess);
  }
  const double slope = ols_slope(u, e);
  CHECK(slope == doctest::Approx(-0.2 / 0.8).epsilon(0.15));
}

TEST_CASE("sparse grid points are excluded with their exceedance counts") {
  const std::vector<double> x = draw_gpd_lows(500, 0.1, 1.0, 7);
  const std::vector<double> grid = threshold_grid(x, 20);
  const MrlCurve c = mrl_curve(x, grid, 50);
  CHECK(!c.excluded.empty());
  for (const MrlPoint& p : c.excluded) CHECK(p.k < 50);
  for (const MrlPoint& p : c.points) CHECK(p.k >= 50);
}

TEST_CASE("mean-excess rule defers on a globally linear curve") {
  const std::vector<double> u{1, 2, 3, 4, 5, 6};
  const std::vector<double> e{3.0, 2.8, 2.6, 2.4, 2.2, 2.0};
  const ThresholdDecision d = mrl_threshold(hand_curve(u, e, 1e-6), 0.95, 3);
  CHECK(d.status == ThresholdStatus::Deferred);
  CHECK(!d.u0.has_value());
  CHECK(d.r2_mrl >= 0.95);
}

TEST_CASE("mean-excess rule cuts the prefix at the kink") {
  const std::vector<double> u{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> e{3.0, 2.8, 2.6, 2.4, 2.2, 2.0, 3.5, 5.0};
  const ThresholdDecision d = mrl_threshold(hand_curve(u, e, 1e-6), 0.95, 3);
  REQUIRE(d.status == ThresholdStatus::Decided);
  CHECK(*d.u0 == 6.0);
  CHECK(d.r2_mrl >= 0.95);
}

TEST_CASE("mean-excess rule reports infeasible when nothing is linear") {
  // Strict zigzag: no prefix of three or more points fits a line.
  const std::vector<double> u{1, 2, 3, 4, 5, 6};
  const std::vector<double> e{1.0, 5.0, 0.5, 6.0, 0.2, 7.0};
  const ThresholdDecision d = mrl_threshold(hand_curve(u, e, 1e-9), 0.95, 3);
  CHECK(d.status == ThresholdStatus::Infeasible);
  CHECK(!d.u0.has_value());
}

TEST_CASE("stability rule decides at the top of a stable grid") {
  const std::vector<double> u{1, 2, 3, 4, 5, 6};
  const std::vector<double> xi(6, 0.11);
  const std::vector<double> ss(6, 0.74);
  const ThresholdDecision d = stability_threshold(hand_stability(u, xi, ss, 0.02, 0.05), 0.95, 3);
  REQUIRE(d.status == ThresholdStatus::Decided);
  CHECK(*d.u0 == 6.0);
  CHECK(d.r2_xi >= 0.95);
  CHECK(d.r2_sigma_star >= 0.95);
}

TEST_CASE("stability rule stops where the curves break") {
  const std::vector<double> u{1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> xi{0.10, 0.10, 0.10, 0.10, 0.10, 0.40, 0.80};
  const std::vector<double> ss{0.74, 0.74, 0.74, 0.74, 0.74, 1.80, 3.00};
  const ThresholdDecision d = stability_threshold(hand_stability(u, xi, ss, 1e-4, 1e-4), 0.95, 3);
  REQUIRE(d.status == ThresholdStatus::Decided);
  CHECK(*d.u0 == 5.0);
}

TEST_CASE("stability rule needs a minimum prefix") {
  StabilityCurves c;
  c.points.push_back(StabilityPoint{1.0, 100, 0.1, 0.01, 0.7, 0.01, true});
  c.points.push_back(StabilityPoint{2.0, 100, 0.1, 0.01, 0.7, 0.01, true});
  const ThresholdDecision d = stability_threshold(c, 0.95, 3);
  CHECK(d.status == ThresholdStatus::Infeasible);
}

TEST_CASE("exact tail data keeps the whole grid") {
  // When every threshold is valid the selector should not discard data: the
  // decision lands at (or next to) the shallowest grid point.
  const std::vector<double> x = draw_gpd_lows(10000, 0.1, 1.0, 10);
  const TimeSeries series(x);
  ThresholdConfig cfg;
  const ThresholdSelection sel = select_threshold(series, cfg);
  REQUIRE(sel.decision.u0.has_value());
  const std::vector<double> grid = threshold_grid(series, cfg.n_points);
  CHECK(*sel.decision.u0 == grid.back());
  CHECK(sel.decision.status == ThresholdStatus::Decided);
}

TEST_CASE("selection is never empty on plentiful clean data") {
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    const std::vector<double> x = draw_gpd_lows(10000, 0.15, 2.0, seed);
    const ThresholdSelection sel = select_threshold(TimeSeries(x), ThresholdConfig{});
    CHECK(sel.decision.u0.has_value());
  }
}

TEST_CASE("spliced tail is cut within one grid step") {
  const SyntheticData data =
      generate(SyntheticSpec::gpd_tail_splice(20000, 4, 0.1, 1.0, -2.0, 0.15, 0.0, 1.0));
  ThresholdConfig cfg;
  cfg.k_min = 500;
  const ThresholdSelection sel = select_threshold(data.series, cfg);
  REQUIRE(sel.decision.u0.has_value());
  const std::vector<double> grid = threshold_grid(data.series, cfg.n_points);
  const double step = grid[1] - grid[0];
  CHECK(std::fabs(*sel.decision.u0 - (-2.0)) <= step + 1e-12);
}

TEST_CASE("serial dependence raises a warning but still selects") {
  // AR(1) lows: the selector warns on dependence instead of refusing.
  const CounterRng rng(stream_key(21, 8202, 0));
  std::vector<double> x(20000);
  double prev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    prev = 0.9 * prev + rng.normal(i);
    x[i] = prev;
  }
  const ThresholdSelection sel = select_threshold(TimeSeries(std::move(x)), ThresholdConfig{});
  CHECK(!sel.input_iid);
  CHECK(!sel.warning.empty());
}

TEST_CASE("stability curves report uncertainty and regularity") {
  const std::vector<double> x = draw_gpd_lows(20000, 0.1, 1.0, 15);
  const std::vector<double> grid = threshold_grid(x, 25);
  const StabilityCurves c = stability_curves(x, grid, 200, x.size());
  REQUIRE(!c.points.empty());
  CHECK(c.excluded.size() == c.notes.size());
  for (const StabilityPoint& p : c.points) {
    CHECK(p.k >= 200);
    CHECK(p.regular);
    CHECK(p.se_xi > 0.0);
    CHECK(p.se_sigma_star > 0.0);
  }
  // sigma* is threshold-invariant for a true GPD tail: the fitted values
  // should cluster around sigma + xi * u with u anchored at zero, i.e. 1.0.
  for (const StabilityPoint& p : c.points)
    CHECK(p.sigma_star == doctest::Approx(1.0).epsilon(0.25));
}
