#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "evtail/error.hpp"
#include "evtail/gpd.hpp"
#include "evtail/mssd.hpp"
#include "evtail/rng.hpp"
#include "evtail/series.hpp"
#include "evtail/stats.hpp"

using namespace evtail;

namespace {

std::vector<double> draw_gpd_lows(std::size_t n, double xi, double sigma,
                                  std::uint64_t seed, std::uint64_t purpose) {
  const CounterRng rng(stream_key(seed, purpose, 0));
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

// Cycles through {0, -1, -2}: the lower tail has two-point support, so no
// prefix ever produces a usable tail fit.
std::vector<double> three_point(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -static_cast<double>(i % 3);
  return x;
}

}  // namespace

TEST_CASE("bootstrap_resample draws only from the source") {
  std::mt19937_64 rng(42);
  const std::vector<double> single{7.0};
  const std::vector<double> out = bootstrap_resample(single, 5, rng);
  REQUIRE(out.size() == 5);
  for (double v : out) CHECK(v == 7.0);

  const std::vector<double> source{1.0, 2.0, 3.0};
  const std::vector<double> mixed = bootstrap_resample(source, 200, rng);
  for (double v : mixed)
    CHECK((v == 1.0 || v == 2.0 || v == 3.0));
}

TEST_CASE("bootstrap_resample is reproducible for a fixed generator state") {
  const std::vector<double> source{0.5, 1.5, 2.5, 3.5};
  std::mt19937_64 a(7), b(7), c(8);
  const std::vector<double> ra = bootstrap_resample(source, 50, a);
  const std::vector<double> rb = bootstrap_resample(source, 50, b);
  const std::vector<double> rc = bootstrap_resample(source, 50, c);
  CHECK(ra == rb);
  CHECK(ra != rc);
}

TEST_CASE("bootstrap_resample keeps about 1 - 1/e of distinct values") {
  const std::size_t n = 2000;
  std::vector<double> source(n);
  for (std::size_t i = 0; i < n; ++i) source[i] = static_cast<double>(i);
  std::mt19937_64 rng(9);
  const std::vector<double> out = bootstrap_resample(source, n, rng);
  const std::set<double> distinct(out.begin(), out.end());
  const double expected = static_cast<double>(n) * (1.0 - std::exp(-1.0));
  // sd of the distinct count is about sqrt(n * 0.23) ~ 21; allow > 3 sd.
  CHECK(std::fabs(static_cast<double>(distinct.size()) - expected) < 70.0);
}

TEST_CASE("bootstrap_resample rejects degenerate requests") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(bootstrap_resample(std::vector<double>{}, 3, rng), InvalidArgument);
  CHECK_THROWS_AS(bootstrap_resample(std::vector<double>{1.0}, 0, rng), InvalidArgument);
}

TEST_CASE("ad_normality_p is roughly uniform under normal data") {
  // Scaled-down calibration check; the full 1000-seed version runs in the
  // acceptance suite.  The 95% Kolmogorov band for 300 draws is ~0.078; the
  // bound below still rejects a miscalibrated mapping, which lands >= 0.3.
  const int seeds = 300, n = 200;
  std::vector<double> ps(seeds);
  for (int s = 0; s < seeds; ++s) {
    const CounterRng rng(stream_key(s + 1, 8301, 0));
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal(i);
    ps[s] = ad_normality_p(x);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const double f = static_cast<double>(i + 1) / seeds;
    ks = std::max(ks, std::max(std::fabs(f - ps[i]),
                               std::fabs(ps[i] - static_cast<double>(i) / seeds)));
  }
  CHECK(ks < 0.12);
  const double p_mean = mean(ps);
  CHECK(p_mean > 0.40);
  CHECK(p_mean < 0.60);
}

TEST_CASE("ad_normality_p rejects gross non-normality") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const CounterRng rng(stream_key(seed, 8302, 0));
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.exponential(i);
    CHECK(ad_normality_p(x) < 0.01);
  }
}

TEST_CASE("ad_normality_p input validation") {
  CHECK_THROWS_AS(ad_normality_p(std::vector<double>(20, 3.14)), InvalidArgument);
  CHECK_THROWS_AS(ad_normality_p(std::vector<double>{1, 2, 3, 4, 5, 6, 7}),
                  InvalidArgument);
}

TEST_CASE("min_regular_size finds the first usable prefix on tail data") {
  const std::vector<double> x = draw_gpd_lows(2000, 0.1, 1.0, 3, 8203);
  const std::optional<std::size_t> n0 = min_regular_size(x, 0.2, 50);
  REQUIRE(n0.has_value());
  CHECK(*n0 == 100);
  CHECK(*n0 % 50 == 0);

  // The returned prefix really does admit a regular fit under the same cut.
  std::vector<double> prefix(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(*n0));
  std::sort(prefix.begin(), prefix.end());
  const std::size_t k = static_cast<std::size_t>(
      std::llround(0.2 * static_cast<double>(prefix.size())));
  const double u = prefix[k];
  std::vector<double> y;
  for (std::size_t i = 0; i < k; ++i)
    if (prefix[i] < u) y.push_back(u - prefix[i]);
  const GpdFit fit = fit_gpd(y, u, prefix.size());
  CHECK(fit.params.xi > -0.5);
}

TEST_CASE("min_regular_size gives up on bounded two-point tails") {
  CHECK(!min_regular_size(three_point(600), 0.3, 50).has_value());
}

TEST_CASE("min_regular_size input validation") {
  const std::vector<double> x = draw_gpd_lows(200, 0.1, 1.0, 4, 8203);
  CHECK_THROWS_AS(min_regular_size(std::vector<double>{}, 0.2, 10), InsufficientData);
  CHECK_THROWS_AS(min_regular_size(x, 0.0, 10), InvalidArgument);
  CHECK_THROWS_AS(min_regular_size(x, 1.0, 10), InvalidArgument);
  CHECK_THROWS_AS(min_regular_size(x, 0.2, 0), InvalidArgument);
}

TEST_CASE("mssd finds an interior sufficient size on tail data") {
  const TimeSeries series(draw_gpd_lows(4000, 0.1, 1.0, 2, 8202));
  MssdConfig cfg;
  cfg.M = 8;
  cfg.K = 30;
  cfg.grid_points = 8;
  cfg.m = 1e5;
  cfg.seed = 11;
  const MssdReport rep = mssd(series, cfg);

  REQUIRE(rep.verdict == MssdVerdict::Feasible);
  REQUIRE(rep.j0.has_value());
  CHECK(*rep.j0 < rep.n);
  CHECK(rep.n == 4000);
  CHECK(rep.zeta0 > 0.0);
  CHECK(rep.zeta0 < 1.0);
  CHECK(rep.u0 < 0.0);
  CHECK(rep.t_star ==
        doctest::Approx(student_t_quantile(0.95, 7.0)).epsilon(1e-12));

  // No cell failed on clean tail data, so every row aggregates all M sets and
  // the reported bound must reconstruct exactly.
  for (const MssdSizeRow& row : rep.rows) {
    REQUIRE(row.missing_cells == 0);
    REQUIRE(!row.excluded);
    CHECK(row.lower == doctest::Approx(row.p_bar - rep.t_star * row.s /
                                           std::sqrt(8.0))
                           .epsilon(1e-12));
  }

  // Recompute the stopping rule from the published rows: the reported j0 is
  // the first size whose whole suffix clears alpha, and its predecessor fails.
  std::size_t j0_index = rep.rows.size();
  for (std::size_t i = rep.rows.size(); i-- > 0;) {
    if (rep.rows[i].lower > cfg.alpha)
      j0_index = i;
    else
      break;
  }
  REQUIRE(j0_index < rep.rows.size());
  CHECK(rep.rows[j0_index].j == *rep.j0);
  REQUIRE(j0_index > 0);  // interior: the smallest grid size fails
  CHECK(rep.rows[j0_index - 1].lower <= cfg.alpha);

  // Gains are differences of spread against the stopping size.
  const double s0 = rep.rows[j0_index].s;
  CHECK(rep.rows[j0_index].gain == 0.0);
  for (std::size_t i = j0_index; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].gain == doctest::Approx(rep.rows[i].s - s0).epsilon(1e-12));
}

TEST_CASE("mssd is deterministic across thread counts and reruns") {
  const TimeSeries series(draw_gpd_lows(1500, 0.1, 1.0, 5, 8202));
  MssdConfig cfg;
  cfg.M = 5;
  cfg.K = 20;
  cfg.grid_points = 5;
  cfg.m = 1e4;
  cfg.seed = 3;
  cfg.n_threads = 1;
  const MssdReport a = mssd(series, cfg);
  cfg.n_threads = 3;
  const MssdReport b = mssd(series, cfg);
  const MssdReport c = mssd(series, cfg);

  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.j0 == b.j0);
  CHECK(a.verdict == b.verdict);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].j == b.rows[i].j);
    CHECK(a.rows[i].p_bar == b.rows[i].p_bar);
    CHECK(a.rows[i].s == b.rows[i].s);
    CHECK(a.rows[i].lower == b.rows[i].lower);
    CHECK(b.rows[i].p_bar == c.rows[i].p_bar);
  }
}

TEST_CASE("mssd reports infeasible when no prefix fits") {
  const MssdReport rep = [] {
    MssdConfig cfg;
    cfg.M = 4;
    cfg.K = 10;
    cfg.grid_points = 3;
    return mssd(TimeSeries(three_point(600)), cfg);
  }();
  CHECK(rep.verdict == MssdVerdict::Infeasible);
  CHECK(!rep.j0.has_value());
  CHECK(rep.rows.empty());
  CHECK(rep.note.find("collect at least") != std::string::npos);
}

TEST_CASE("mssd validates its configuration") {
  const TimeSeries series(draw_gpd_lows(500, 0.1, 1.0, 6, 8202));
  MssdConfig cfg;
  cfg.M = 1;
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
  cfg = MssdConfig{};
  cfg.K = 1;
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
  cfg = MssdConfig{};
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
  cfg = MssdConfig{};
  cfg.confidence = 0.0;
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
  cfg = MssdConfig{};
  cfg.grid_points = 1;
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
  cfg = MssdConfig{};
  cfg.n0 = 500;  // start size must sit strictly below the series length
  CHECK_THROWS_AS(mssd(series, cfg), InvalidArgument);
}
