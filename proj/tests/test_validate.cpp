#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "doctest.h"
#include "evtail/error.hpp"
#include "evtail/gpd.hpp"
#include "evtail/rng.hpp"
#include "evtail/stats.hpp"
#include "evtail/synthetic.hpp"
#include "evtail/validate.hpp"

using namespace evtail;

namespace {

std::vector<double> draw_gpd_excesses(std::size_t k, double xi, double sigma,
                                      std::uint64_t seed) {
  const CounterRng rng(stream_key(seed, 8401, 0));
  std::vector<double> y(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double p = rng.uniform(i);
    y[i] = (std::fabs(xi) < 1e-14) ? -sigma * std::log1p(-p)
                                   : sigma / xi * (std::pow(1.0 - p, -xi) - 1.0);
  }
  return y;
}

std::vector<double> draw_normals(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(stream_key(seed, 8402, 0));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal(i);
  return x;
}

// Both tails at the same exceedance fraction, fitted on the empirical
// quantile thresholds; the upper tail works on the negated series.
std::pair<GpdFit, GpdFit> tail_fits(const std::vector<double>& x, double fraction) {
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double u_low = empirical_quantile(sorted, fraction);
  const GpdFit lower = fit_gpd(excesses(x, u_low), u_low, x.size());

  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  std::vector<double> neg_sorted(neg);
  std::sort(neg_sorted.begin(), neg_sorted.end());
  const double u_neg = empirical_quantile(neg_sorted, fraction);
  const GpdFit upper = fit_gpd(excesses(neg, u_neg), u_neg, neg.size());
  return {lower, upper};
}

}  // namespace

TEST_CASE("pp_points sits on the diagonal for a well-specified fit") {
  const std::vector<double> y = draw_gpd_excesses(5000, 0.1, 1.0, 1);
  const GpdFit fit = fit_gpd(y, 0.0, 50000);
  const ProbabilityPlotData plot = pp_points(fit, y);

  REQUIRE(plot.kind == PlotKind::Pp);
  REQUIRE(plot.points.size() == 5000);
  CHECK(plot.max_abs_dev <= 0.02);
  CHECK(plot.rmse_dev <= plot.max_abs_dev);
  for (std::size_t i = 0; i < plot.points.size(); ++i) {
    const auto& [emp, mod] = plot.points[i];
    CHECK(emp >= 0.0);
    CHECK(emp <= 1.0);
    CHECK(mod >= 0.0);
    CHECK(mod <= 1.0);
    if (i > 0) {
      CHECK(emp >= plot.points[i - 1].first);
      CHECK(mod >= plot.points[i - 1].second);
    }
  }
}

TEST_CASE("pp_points deviation shrinks like one over root k") {
  for (std::size_t k : {1000u, 10000u, 100000u}) {
    const std::vector<double> y = draw_gpd_excesses(k, 0.1, 1.0, 2);
    const GpdFit fit = fit_gpd(y, 0.0, 10 * k);
    const ProbabilityPlotData plot = pp_points(fit, y);
    // 99.9% Kolmogorov band; a rate slower than 1/sqrt(k) would blow through.
    CHECK(plot.max_abs_dev <= 1.63 / std::sqrt(static_cast<double>(k)));
  }
}

TEST_CASE("pp_points flags a mis-specified model") {
  const std::vector<double> y = draw_gpd_excesses(5000, 0.0, 1.0, 3);
  GpdFit wrong;
  wrong.params = {0.5, 1.0, 0.0};
  wrong.k = y.size();
  wrong.zeta = 0.1;
  const ProbabilityPlotData plot = pp_points(wrong, y);
  CHECK(plot.max_abs_dev >= 0.05);
}

TEST_CASE("pp_points input validation") {
  GpdFit fit;
  fit.params = {0.1, 1.0, 0.0};
  CHECK_THROWS_AS(pp_points(fit, std::vector<double>{1.0, 2.0}), InsufficientData);
  CHECK_THROWS_AS(pp_points(fit, std::vector<double>{-1.0, 1.0, 2.0}),
                  InvalidArgument);
}

TEST_CASE("qq_points recovers the construction exactly") {
  GpdFit fit;
  fit.params = {0.2, 1.5, -3.0};
  const std::size_t k = 200;
  std::vector<double> samples;
  for (std::size_t i = 1; i <= k; ++i) {
    const double p = static_cast<double>(i) / (static_cast<double>(k) + 1.0);
    samples.push_back(-3.0 - gpd_quantile(fit.params, 1.0 - p));
  }
  const ProbabilityPlotData plot = qq_points(fit, samples, -3.0);
  REQUIRE(plot.points.size() == k);
  CHECK(plot.max_abs_dev <= 1e-10);
}

TEST_CASE("qq_points matches the exponential closed form") {
  const double u = -2.0, sigma = 1.3;
  std::vector<double> samples = draw_gpd_excesses(500, 0.0, sigma, 4);
  for (double& v : samples) v = u - v;  // sub-threshold samples
  GpdFit fit;
  fit.params = {0.0, sigma, u};
  const ProbabilityPlotData plot = qq_points(fit, samples, u);
  const std::size_t k = plot.points.size();
  REQUIRE(k == 500);
  for (std::size_t i : {std::size_t{0}, k / 2, k - 1}) {
    const double rank = static_cast<double>(i + 1);
    const double expected =
        u + sigma * std::log(rank / (static_cast<double>(k) + 1.0));
    CHECK(plot.points[i].second == doctest::Approx(expected).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < k; ++i)
    CHECK(plot.points[i].second >= plot.points[i - 1].second);
}

TEST_CASE("qq_points needs three sub-threshold samples") {
  GpdFit fit;
  fit.params = {0.1, 1.0, 0.0};
  CHECK_THROWS_AS(qq_points(fit, std::vector<double>{-1.0, -2.0, 1.0, 2.0}, 0.0),
                  InsufficientData);
}

TEST_CASE("qq_points stays inside a parametric-bootstrap envelope") {
  const double u = -1.5;
  const std::size_t k = 2000;
  std::vector<double> y = draw_gpd_excesses(k, 0.1, 1.0, 5);
  std::vector<double> samples;
  for (double v : y) samples.push_back(u - v);
  const GpdFit fit = fit_gpd(y, u, 10 * k);
  const ProbabilityPlotData plot = qq_points(fit, samples, u);

  // Envelope: order statistics of replicas drawn from the fitted model.
  const std::size_t B = 200;
  std::vector<std::vector<double>> order(k);
  for (std::size_t b = 0; b < B; ++b) {
    const CounterRng rng(stream_key(b + 1, 8403, 0));
    std::vector<double> rep(k);
    for (std::size_t i = 0; i < k; ++i)
      rep[i] = u - gpd_quantile(fit.params, rng.uniform(i));
    std::sort(rep.begin(), rep.end());
    for (std::size_t i = 0; i < k; ++i) order[i].push_back(rep[i]);
  }
  std::size_t outside = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::sort(order[i].begin(), order[i].end());
    const double lo = order[i][static_cast<std::size_t>(0.025 * (B - 1))];
    const double hi = order[i][static_cast<std::size_t>(0.975 * (B - 1))];
    if (plot.points[i].first < lo || plot.points[i].first > hi) ++outside;
  }
  // Pointwise 95% bands: a few percent of ranks may poke out.
  CHECK(static_cast<double>(outside) / static_cast<double>(k) <= 0.10);
}

TEST_CASE("composite cdf reproduces the normal distribution") {
  const std::vector<double> x = draw_normals(100000, 6);
  const auto [lower, upper] = tail_fits(x, 0.05);
  const CompositeCdfModel model = build_composite(x, lower, upper);

  CHECK(model.zeta_low == doctest::Approx(0.05).epsilon(0.05));
  CHECK(model.zeta_high == doctest::Approx(0.05).epsilon(0.05));
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = -4.0 + 8.0 * static_cast<double>(i) / 199.0;
    worst = std::max(worst, std::fabs(composite_cdf(model, t) - normal_cdf(t)));
  }
  CHECK(worst <= 0.01);

  // Junction anchors are exact and the curve is continuous across them.
  CHECK(composite_cdf(model, model.u_low) ==
        doctest::Approx(model.zeta_low).epsilon(1e-12));
  CHECK(composite_cdf(model, model.u_high) ==
        doctest::Approx(1.0 - model.zeta_high).epsilon(1e-12));
  for (double u : {model.u_low, model.u_high}) {
    const double at = composite_cdf(model, u);
    CHECK(std::fabs(composite_cdf(model, u - 1e-9) - at) <= 1e-9);
    CHECK(std::fabs(composite_cdf(model, u + 1e-9) - at) <= 1e-9);
  }

  // Deciles of the sample agree with the model within sampling resolution.
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double band = 2.0 / std::sqrt(static_cast<double>(x.size()));
  for (int d = 1; d <= 9; ++d) {
    const double q = empirical_quantile(sorted, d / 10.0);
    CHECK(std::fabs(composite_cdf(model, q) - d / 10.0) <= band);
  }
}

TEST_CASE("composite cdf is monotone far beyond the data") {
  const std::vector<double> x = draw_normals(10000, 7);
  const auto [lower, upper] = tail_fits(x, 0.05);
  const CompositeCdfModel model = build_composite(x, lower, upper);
  double prev = -1.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = -8.0 + 16.0 * static_cast<double>(i) / 9999.0;
    const double c = composite_cdf(model, t);
    CHECK(c >= prev);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    prev = c;
  }
}

TEST_CASE("build_composite rejects inconsistent pieces") {
  const std::vector<double> x = draw_normals(5000, 8);
  const auto [lower, upper] = tail_fits(x, 0.05);

  GpdFit crossed = lower;
  crossed.params.u = 10.0;  // above the reflected upper threshold
  CHECK_THROWS_AS(build_composite(x, crossed, upper), InvalidArgument);

  GpdFit greedy_low = lower, greedy_high = upper;
  greedy_low.zeta = 0.6;
  greedy_high.zeta = 0.6;  // tails would overlap in probability
  CHECK_THROWS_AS(build_composite(x, greedy_low, greedy_high), InvalidArgument);
}

// Reference values below come from an independent statistics package fitted
// on the identical frozen draws.
TEST_CASE("fit_parametric matches external fits on frozen data") {
  const TimeSeries weib = generate(SyntheticSpec::weibull(100000, 21, 2.0, 1.0)).series;
  const ParametricFit w = fit_parametric(weib.samples(), Family::Weibull);
  CHECK(w.params[0] == doctest::Approx(2.0056305439).epsilon(2e-4));
  CHECK(w.params[1] == doctest::Approx(0.9994747688).epsilon(2e-4));
  CHECK(w.loglik == doctest::Approx(-59300.684450).epsilon(1e-6));
  CHECK(w.aic == doctest::Approx(2.0 * 2 - 2.0 * w.loglik).epsilon(1e-12));
  CHECK(w.bic ==
        doctest::Approx(2.0 * std::log(100000.0) - 2.0 * w.loglik).epsilon(1e-12));

  // The generating parameters lie within three bootstrap standard errors
  // (se_shape = 0.0050, se_scale = 0.0015 at this sample size).
  CHECK(std::fabs(w.params[0] - 2.0) <= 3.0 * 0.0050);
  CHECK(std::fabs(w.params[1] - 1.0) <= 3.0 * 0.0015);

  const ParametricFit ln = fit_parametric(weib.samples(), Family::Lognormal);
  CHECK(ln.params[0] == doctest::Approx(-0.2883910379).epsilon(1e-6));
  CHECK(ln.params[1] == doctest::Approx(0.6403916983).epsilon(1e-6));
  CHECK(ln.loglik == doctest::Approx(-68487.223407).epsilon(1e-6));

  // The reference package estimates omega numerically, so it carries its
  // optimizer tolerance; the closed-form MLE here is mean(x^2).
  const ParametricFit nak = fit_parametric(weib.samples(), Family::Nakagami);
  CHECK(nak.params[0] == doctest::Approx(1.0041570390).epsilon(1e-4));
  CHECK(nak.params[1] == doctest::Approx(0.9978178042).epsilon(1e-4));
  CHECK(nak.loglik == doctest::Approx(-59300.786528).epsilon(1e-6));

  const ParametricFit nor = fit_parametric(weib.samples(), Family::Normal);
  CHECK(nor.params[0] == doctest::Approx(0.8857947944).epsilon(1e-8));
  CHECK(nor.params[1] == doctest::Approx(0.4616704384).epsilon(1e-8));
  CHECK(nor.loglik == doctest::Approx(-64603.455388).epsilon(1e-6));
}

TEST_CASE("fit_parametric recovers rician parameters") {
  const TimeSeries rice = generate(SyntheticSpec::rician(20000, 22, 1.0, 0.6)).series;
  const ParametricFit r = fit_parametric(rice.samples(), Family::Rician);
  CHECK(r.params[0] == doctest::Approx(0.9949428799).epsilon(2e-3));
  CHECK(r.params[1] == doctest::Approx(0.5943265853).epsilon(2e-3));
  CHECK(r.loglik == doctest::Approx(-15065.257141).epsilon(1e-5));
}

TEST_CASE("rician fit degenerates to rayleigh when the line of sight vanishes") {
  const TimeSeries ray = generate(SyntheticSpec::rayleigh(20000, 23, 0.5)).series;
  const ParametricFit r = fit_parametric(ray.samples(), Family::Rician);
  CHECK(std::fabs(r.params[0]) <= 0.05);
  CHECK(r.params[1] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("weibull fit on exponential data gives unit shape") {
  const TimeSeries expo = generate(SyntheticSpec::exponential(20000, 24, 1.0)).series;
  const ParametricFit w = fit_parametric(expo.samples(), Family::Weibull);
  CHECK(w.params[0] == doctest::Approx(1.0060400948).epsilon(1e-4));
  CHECK(std::fabs(w.params[0] - 1.0) <= 0.03);
}

TEST_CASE("fit_parametric input validation") {
  std::vector<double> small(20, 1.0);
  CHECK_THROWS_AS(fit_parametric(small, Family::Weibull), InsufficientData);
  std::vector<double> with_zero(100, 1.0);
  with_zero[40] = 0.0;
  CHECK_THROWS_AS(fit_parametric(with_zero, Family::Weibull), InvalidArgument);
  CHECK_THROWS_AS(fit_parametric(with_zero, Family::Rician), InvalidArgument);
  CHECK_THROWS_AS(fit_parametric(with_zero, Family::Lognormal), InvalidArgument);
  CHECK_THROWS_AS(fit_parametric(with_zero, Family::Nakagami), InvalidArgument);
  // constant positive data has no spread for any family
  CHECK_THROWS_AS(fit_parametric(std::vector<double>(100, 2.5), Family::Normal),
                  EstimationFailure);
}

TEST_CASE("parametric_cdf agrees with external references") {
  ParametricFit rice;
  rice.family = Family::Rician;
  rice.params = {1.0, 0.6};
  CHECK(parametric_cdf(rice, 0.3) == doctest::Approx(0.031862394079).epsilon(1e-9));
  CHECK(parametric_cdf(rice, 1.0) == doctest::Approx(0.373014663258).epsilon(1e-9));
  CHECK(parametric_cdf(rice, 2.2) == doctest::Approx(0.963883113820).epsilon(1e-9));
  CHECK(parametric_cdf(rice, -1.0) == 0.0);

  ParametricFit nak;
  nak.family = Family::Nakagami;
  nak.params = {1.5, 1.2};
  CHECK(parametric_cdf(nak, 0.8) == doctest::Approx(0.340610180288).epsilon(1e-9));
  CHECK(parametric_cdf(nak, 1.6) == doctest::Approx(0.906309209592).epsilon(1e-9));

  ParametricFit weib;
  weib.family = Family::Weibull;
  weib.params = {2.0, 1.0};
  CHECK(parametric_cdf(weib, 1.0) == doctest::Approx(-std::expm1(-1.0)).epsilon(1e-12));
}

TEST_CASE("select_best_fit prefers the generating family") {
  const TimeSeries weib = generate(SyntheticSpec::weibull(100000, 21, 2.0, 1.0)).series;
  const std::vector<Family> families{Family::Weibull, Family::Normal,
                                     Family::Lognormal};
  const ModelSelection sel = select_best_fit(weib.samples(), families);
  CHECK(sel.best.family == Family::Weibull);
  CHECK(sel.candidates.size() == 3);
  CHECK(sel.failures.empty());
  CHECK(sel.candidates[0].family == Family::Weibull);
  CHECK(sel.candidates[1].family == Family::Normal);
}

TEST_CASE("select_best_fit breaks near-ties by BIC") {
  // Weibull(shape 2) is also Nakagami(m 1), so both families peak at the same
  // likelihood and land within two AIC units; BIC must settle the tie in
  // favor of the better score even when that family is listed second.
  const TimeSeries weib = generate(SyntheticSpec::weibull(100000, 21, 2.0, 1.0)).series;
  const std::vector<Family> families{Family::Nakagami, Family::Weibull};
  const ModelSelection sel = select_best_fit(weib.samples(), families);
  REQUIRE(sel.candidates.size() == 2);
  CHECK(std::fabs(sel.candidates[0].aic - sel.candidates[1].aic) < 2.0);
  CHECK(sel.best.family == Family::Weibull);
}

TEST_CASE("select_best_fit keeps the first of exact duplicates") {
  const TimeSeries weib = generate(SyntheticSpec::weibull(5000, 25, 2.0, 1.0)).series;
  const std::vector<Family> families{Family::Weibull, Family::Weibull};
  const ModelSelection sel = select_best_fit(weib.samples(), families);
  CHECK(sel.candidates.size() == 2);
  CHECK(sel.best.family == Family::Weibull);
  CHECK(sel.best.aic == sel.candidates[0].aic);
}

TEST_CASE("select_best_fit reports when every family fails") {
  std::vector<double> negative(100, -1.0);
  const std::vector<Family> families{Family::Weibull, Family::Lognormal};
  CHECK_THROWS_AS(select_best_fit(negative, families), EstimationFailure);
  CHECK_THROWS_AS(select_best_fit(negative, std::vector<Family>{}), InvalidArgument);
}

TEST_CASE("extrapolate_tail evaluates the fitted family unchanged") {
  ParametricFit nor;
  nor.family = Family::Normal;
  nor.params = {0.0, 1.0};
  const std::vector<double> probes{-8.0, 0.0, 1.0};
  const auto points = extrapolate_tail(nor, probes);
  REQUIRE(points.size() == 3);
  // Ratio comparison: an absolute tolerance is meaningless at 1e-16.
  CHECK(points[0].second / 6.220960574e-16 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(points[1].second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(points[2].second == doctest::Approx(normal_cdf(1.0)).epsilon(1e-12));

  ParametricFit weib;
  weib.family = Family::Weibull;
  weib.params = {1.7, 2.3};
  const double q = 2.3 * std::pow(-std::log1p(-1e-6), 1.0 / 1.7);
  const auto self = extrapolate_tail(weib, std::vector<double>{q});
  CHECK(self[0].second == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("rmse_cdf is zero against the empirical staircase") {
  const TimeSeries expo = generate(SyntheticSpec::exponential(2000, 26, 1.0)).series;
  std::vector<double> sorted(expo.samples());
  std::sort(sorted.begin(), sorted.end());
  const auto staircase = [&](double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) /
           static_cast<double>(sorted.size());
  };
  const double r = rmse_cdf(staircase, expo.samples(), CdfRegion{0.0, 1.0});
  CHECK(r == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rmse_cdf weighs only the requested region") {
  const TimeSeries expo = generate(SyntheticSpec::exponential(100000, 27, 1.0)).series;
  const auto true_cdf = [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); };
  const double lower_tail = rmse_cdf(true_cdf, expo.samples());
  CHECK(lower_tail <= 2e-4);  // default region: empirical CDF <= 1e-2

  CHECK_THROWS_AS(rmse_cdf(true_cdf, std::vector<double>(100, 1.0),
                           CdfRegion{0.0, 1e-3}),
                  InvalidArgument);
  CHECK_THROWS_AS(rmse_cdf(true_cdf, expo.samples(), CdfRegion{0.5, 0.4}),
                  InvalidArgument);
}

TEST_CASE("fitting-region presets match their definitions") {
  const TimeSeries expo = generate(SyntheticSpec::exponential(10000, 28, 1.0)).series;
  const std::vector<double> band = region_by_empirical_cdf(expo.samples(), 1e-3, 1.0);
  CHECK(band.size() == 9991);  // drops the 9 deepest order statistics
  std::vector<double> sorted(expo.samples());
  std::sort(sorted.begin(), sorted.end());
  CHECK(band.front() == sorted[9]);
  CHECK(band.back() == sorted.back());

  const std::vector<double> head = region_first_observations(expo.samples(), 1000);
  REQUIRE(head.size() == 1000);
  for (std::size_t i = 0; i < head.size(); ++i)
    CHECK(head[i] == expo.samples()[i]);  // arrival order, not sorted
  CHECK_THROWS_AS(region_first_observations(expo.samples(), 0), InvalidArgument);
}
