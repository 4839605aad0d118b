#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "evtail/arima.hpp"
#include "evtail/error.hpp"
#include "evtail/filter.hpp"
#include "evtail/garch.hpp"
#include "evtail/rng.hpp"
#include "evtail/series.hpp"
#include "evtail/stats.hpp"
#include "evtail/synthetic.hpp"

using namespace evtail;

namespace {

// Test-local ARMA simulator, independent of the synthetic module.
std::vector<double> simulate_arma(std::size_t n, const std::vector<double>& ar,
                                  const std::vector<double>& ma, double c,
                                  double sd, std::uint64_t seed) {
  const CounterRng rng(stream_key(seed, 8301, 0));
  const std::size_t burn = 500;
  std::vector<double> eps(n + burn), x(n + burn);
  for (std::size_t t = 0; t < n + burn; ++t) {
    eps[t] = sd * rng.normal(t);
    double v = c + eps[t];
    for (std::size_t i = 1; i <= ar.size() && i <= t; ++i) v += ar[i - 1] * x[t - i];
    for (std::size_t j = 1; j <= ma.size() && j <= t; ++j) v += ma[j - 1] * eps[t - j];
    x[t] = v;
  }
  return {x.begin() + burn, x.end()};
}

}  // namespace

TEST_CASE("stationarity and invertibility checks") {
  CHECK(is_stationary(std::vector<double>{0.5}));
  CHECK(is_stationary(std::vector<double>{-0.99}));
  CHECK(!is_stationary(std::vector<double>{1.01}));
  CHECK(is_stationary(std::vector<double>{0.5, 0.3}));
  CHECK(!is_stationary(std::vector<double>{0.5, 0.6}));  // coefficients sum past 1
  CHECK(is_stationary(std::vector<double>{}));
  // invertibility is the same root condition on the MA polynomial
  CHECK(is_invertible(std::vector<double>{0.7}));
  CHECK(!is_invertible(std::vector<double>{-1.2}));
}

TEST_CASE("pacf map always lands in the stationary region") {
  // partial correlations anywhere inside (-1, 1), even near the edges
  const std::vector<double> pacf{0.995, -0.98, 0.93, -0.999};
  const std::vector<double> ar = pacf_to_ar(pacf);
  CHECK(ar.size() == pacf.size());
  CHECK(is_stationary(ar));
  // one-coefficient case is the identity
  const std::vector<double> one = pacf_to_ar(std::vector<double>{0.3});
  CHECK(one[0] == doctest::Approx(0.3));
}

TEST_CASE("AR(1) coefficient recovery") {
  const std::vector<double> x = simulate_arma(100000, {0.7}, {}, 0.3, 1.0, 2);
  const ArimaFit fit = fit_arima(x, 1, 0);
  CHECK(fit.converged);
  REQUIRE(fit.model.ar.size() == 1);
  CHECK(fit.model.ar[0] == doctest::Approx(0.7).epsilon(0.03));
  // stationary mean c / (1 - ar) = 1.0
  CHECK(fit.model.c / (1.0 - fit.model.ar[0]) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.model.innovation_variance == doctest::Approx(1.0).epsilon(0.05));
  REQUIRE(fit.se.size() == 2);
  CHECK(std::fabs(fit.model.ar[0] - 0.7) < 4.0 * fit.se[1]);
}

TEST_CASE("MA(1) coefficient recovery") {
  const std::vector<double> x = simulate_arma(100000, {}, {0.5}, 0.0, 2.0, 3);
  const ArimaFit fit = fit_arima(x, 0, 1);
  CHECK(fit.converged);
  REQUIRE(fit.model.ma.size() == 1);
  CHECK(fit.model.ma[0] == doctest::Approx(0.5).epsilon(0.06));
  CHECK(fit.model.innovation_variance == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("ARMA(1,1) joint recovery") {
  const std::vector<double> x = simulate_arma(100000, {0.6}, {0.3}, 0.0, 1.0, 4);
  const ArimaFit fit = fit_arima(x, 1, 1);
  CHECK(fit.converged);
  CHECK(fit.model.ar[0] == doctest::Approx(0.6).epsilon(0.08));
  CHECK(fit.model.ma[0] == doctest::Approx(0.3).epsilon(0.15));
  // residuals should be white
  CHECK(is_iid(TimeSeries(fit.residuals), 50, 0.10).iid);
}

TEST_CASE("white noise reduces to mean and variance") {
  const CounterRng rng(stream_key(5, 8302, 0));
  std::vector<double> x(20000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.5 + 0.7 * rng.normal(i);
  const ArimaFit fit = fit_arima(x, 0, 0);
  CHECK(fit.model.c == doctest::Approx(mean(x)).epsilon(1e-6));
  CHECK(fit.model.innovation_variance == doctest::Approx(0.49).epsilon(0.05));
  CHECK(fit.offset == 0);
}

TEST_CASE("order search never beats a candidate it contains") {
  const std::vector<double> x = simulate_arma(20000, {0.5, 0.2}, {}, 0.0, 1.0, 6);
  const TimeSeries series(x);
  const ArimaFit best = fit_arima_auto(series, 3, 3);
  const ArimaFit truth = fit_arima(series, 2, 0);
  CHECK(best.aic <= truth.aic + 1e-9);
}

TEST_CASE("arma input validation") {
  CHECK_THROWS_AS(fit_arima(std::vector<double>(30, 1.0), 6, 0), InvalidArgument);
  CHECK_THROWS_AS(fit_arima(std::vector<double>(40, 1.0), 1, 1), InsufficientData);
  CHECK_THROWS_AS(fit_arima(std::vector<double>(400, 3.14), 1, 0), EstimationFailure);
}

TEST_CASE("variance recursion matches a hand computation") {
  GarchModel m;
  m.k = 0.1;
  m.gamma = 0.8;
  m.phi = 0.1;
  m.psi = 0.05;
  const std::vector<double> eps{1.0, -2.0, 0.5};
  const std::vector<double> s2 = garch_variance_path(eps, m, 2.0);
  REQUIRE(s2.size() == 3);
  CHECK(s2[0] == doctest::Approx(2.0));
  // negative shock loads phi + psi, positive shock loads phi - psi
  CHECK(s2[1] == doctest::Approx(0.1 + 0.8 * 2.0 + (0.1 - 0.05) * 1.0));
  CHECK(s2[2] == doctest::Approx(0.1 + 0.8 * s2[1] + (0.1 + 0.05) * 4.0));
}

TEST_CASE("asymmetric variance parameters are recovered") {
  const SyntheticData data = generate(
      SyntheticSpec::arma_gjr(200000, 7, {}, {}, 0.0, 0.1, 0.8, 0.1, 0.05));
  const GarchFit fit = fit_garch(data.series.samples());
  CHECK(fit.converged);
  CHECK(fit.heteroskedastic);
  CHECK(fit.model.gamma == doctest::Approx(0.8).epsilon(0.08));
  CHECK(fit.model.phi == doctest::Approx(0.1).epsilon(0.4));
  CHECK(fit.model.psi == doctest::Approx(0.05).epsilon(0.6));
  // implied unconditional variance matches the sample; for the sign-term
  // recursion the asymmetry averages out under symmetric innovations
  const double uncond = fit.model.k / (1.0 - fit.model.gamma - fit.model.phi);
  CHECK(uncond == doctest::Approx(variance(data.series.samples())).epsilon(0.10));
  for (double s2 : fit.sigma2) CHECK(s2 > 0.0);
  CHECK(fit.z.size() == fit.sigma2.size());
}

TEST_CASE("homoskedastic input turns the flag off") {
  const CounterRng rng(stream_key(8, 8303, 0));
  std::vector<double> eps(5000);
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = 1.3 * rng.normal(i);
  const GarchFit fit = fit_garch(eps);
  CHECK(!fit.heteroskedastic);
  // the filter reduces to a near-constant rescale
  const double uncond = fit.model.k / (1.0 - fit.model.gamma - fit.model.phi);
  CHECK(uncond == doctest::Approx(1.69).epsilon(0.10));
}

TEST_CASE("garch input validation") {
  CHECK_THROWS_AS(fit_garch(std::vector<double>(10, 0.5)), InsufficientData);
  GarchModel bad;
  bad.k = -1.0;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  GarchModel explosive;
  explosive.k = 0.1;
  explosive.gamma = 0.9;
  explosive.phi = 0.2;
  explosive.psi = 0.0;
  CHECK_THROWS_AS(validate(explosive), InvalidArgument);
}

TEST_CASE("filter pipeline whitens an ARMA plus GJR series") {
  const SyntheticData data = generate(SyntheticSpec::arma_gjr(
      50000, 9, {0.5}, {}, 0.2, 0.05, 0.85, 0.08, 0.04));
  FilterConfig cfg;
  cfg.p = 1;
  cfg.q = 0;
  cfg.iid_threshold = 0.10;
  const FilteredResiduals out = arima_garch_pipeline(data.series, cfg);
  CHECK(std::fabs(out.z_mean) <= cfg.max_abs_mean);
  CHECK(std::fabs(out.z_variance - 1.0) <= cfg.max_var_error);
  CHECK(out.diagnostics.iid);
  CHECK(out.z.size() + out.offset == data.series.size());

  // the standardized residuals reconstruct the mean-equation innovations
  const std::vector<double>& z = out.z.samples();
  for (std::size_t i = 0; i < 50 && i < z.size(); ++i) {
    const double eps = z[i] * std::sqrt(out.garch.sigma2[i]);
    CHECK(eps == doctest::Approx(out.arima.residuals[i]).epsilon(1e-9));
  }
}
