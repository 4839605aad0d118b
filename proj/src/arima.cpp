#include "evtail/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "evtail/error.hpp"
#include "evtail/strfmt.hpp"
#include "evtail/optim.hpp"
#include "evtail/stats.hpp"

namespace evtail {

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
  std::vector<double> a(pacf.begin(), pacf.end());
  std::vector<double> prev(a.size());
  for (std::size_t k = 1; k < a.size(); ++k) {
    std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), prev.begin());
    for (std::size_t i = 0; i < k; ++i) a[i] = prev[i] - pacf[k] * prev[k - 1 - i];
  }
  return a;
}

bool is_stationary(std::span<const double> ar_coefficients) {
  std::vector<double> a(ar_coefficients.begin(), ar_coefficients.end());
  for (std::size_t m = a.size(); m > 0; --m) {
    const double r = a[m - 1];
    if (!(std::abs(r) < 1.0)) return false;
    const double den = 1.0 - r * r;
    std::vector<double> down(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i)
      down[i] = (a[i] + r * a[m - 2 - i]) / den;
    a = std::move(down);
  }
  return true;
}

bool is_invertible(std::span<const double> ma_coefficients) {
  std::vector<double> negated(ma_coefficients.size());
  for (std::size_t i = 0; i < negated.size(); ++i) negated[i] = -ma_coefficients[i];
  return is_stationary(negated);
}

namespace {

// Innovations of the conditional recursion; eps[t - t0] pairs with x[t].
// Pre-sample innovations are taken as zero.
void css_residuals(std::span<const double> x, double c, std::span<const double> ar,
                   std::span<const double> ma, std::size_t t0,
                   std::vector<double>& eps) {
  const std::size_t n = x.size();
  eps.assign(n - t0, 0.0);
  for (std::size_t t = t0; t < n; ++t) {
    double pred = c;
    for (std::size_t i = 0; i < ar.size(); ++i) pred += ar[i] * x[t - 1 - i];
    for (std::size_t j = 0; j < ma.size(); ++j) {
      const std::size_t s = t - 1 - j;
      if (s >= t0) pred += ma[j] * eps[s - t0];
    }
    eps[t - t0] = x[t] - pred;
  }
}

double sum_sq(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

struct NaturalParams {
  double c = 0.0;
  std::vector<double> ar, ma;
};

NaturalParams decode(std::span<const double> theta, std::size_t p, std::size_t q) {
  NaturalParams nat;
  nat.c = theta[0];
  std::vector<double> pac(p);
  for (std::size_t i = 0; i < p; ++i) pac[i] = std::tanh(theta[1 + i]);
  nat.ar = pacf_to_ar(pac);
  pac.resize(q);
  for (std::size_t j = 0; j < q; ++j) pac[j] = std::tanh(theta[1 + p + j]);
  nat.ma = pacf_to_ar(pac);
  for (double& b : nat.ma) b = -b;  // invertible by construction
  return nat;
}

// (T/2) log css in natural parameters; the additive constants of the profiled
// Gaussian likelihood drop out of every difference this is used in.
double half_t_log_css(std::span<const double> x, const NaturalParams& nat,
                      std::size_t t0, std::vector<double>& scratch) {
  css_residuals(x, nat.c, nat.ar, nat.ma, t0, scratch);
  const double css = sum_sq(scratch);
  if (!(css > 0.0) || !std::isfinite(css))
    return std::numeric_limits<double>::infinity();
  return 0.5 * static_cast<double>(scratch.size()) * std::log(css);
}

std::vector<double> hessian_se(std::span<const double> x, const NaturalParams& opt,
                               std::size_t t0) {
  std::vector<double> theta{opt.c};
  theta.insert(theta.end(), opt.ar.begin(), opt.ar.end());
  theta.insert(theta.end(), opt.ma.begin(), opt.ma.end());
  const std::size_t d = theta.size();
  std::vector<double> scratch;
  const auto f = [&](std::span<const double> t) {
    NaturalParams nat;
    nat.c = t[0];
    nat.ar.assign(t.begin() + 1, t.begin() + 1 + static_cast<std::ptrdiff_t>(opt.ar.size()));
    nat.ma.assign(t.end() - static_cast<std::ptrdiff_t>(opt.ma.size()), t.end());
    return half_t_log_css(x, nat, t0, scratch);
  };
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(theta[i]));
  const double f0 = f(theta);
  std::vector<double> H(d * d, 0.0);
  std::vector<double> t = theta;
  for (std::size_t i = 0; i < d; ++i) {
    t = theta;
    t[i] = theta[i] + h[i];
    const double fp = f(t);
    t[i] = theta[i] - h[i];
    const double fm = f(t);
    H[i * d + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d; ++j) {
      t = theta;
      t[i] += h[i];
      t[j] += h[j];
      const double fpp = f(t);
      t[j] = theta[j] - h[j];
      const double fpm = f(t);
      t[i] = theta[i] - h[i];
      const double fmm = f(t);
      t[j] = theta[j] + h[j];
      const double fmp = f(t);
      H[i * d + j] = H[j * d + i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  std::vector<double> se(d, std::numeric_limits<double>::quiet_NaN());
  if (invert_inplace(H, d))
    for (std::size_t i = 0; i < d; ++i)
      if (H[i * d + i] > 0.0) se[i] = std::sqrt(H[i * d + i]);
  return se;
}

}  // namespace

ArimaFit fit_arima(std::span<const double> samples, std::size_t p, std::size_t q) {
  if (p > 5 || q > 5)
    throw InvalidArgument("fit_arima: orders above 5 are not supported");
  const std::size_t t0 = std::max(p, q);
  const std::size_t need = 50 * (p + q + 1);
  if (samples.size() < need)
    throw InsufficientData(strformat(
        "fit_arima: %zu samples, need at least %zu for order (%zu, %zu)",
        samples.size(), need, p, q));
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidArgument("fit_arima: non-finite sample");

  const double xbar = mean(samples);
  const double s = stddev(samples);
  // relative guard: summation residue makes stddev of a constant series a
  // tiny positive number rather than zero
  if (!(s > std::fabs(xbar) * 1e-12 + 1e-300))
    throw EstimationFailure("fit_arima: series is constant");
  std::vector<double> w(samples.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (samples[i] - xbar) / s;

  const std::size_t dim = 1 + p + q;
  std::vector<double> scratch;
  const auto objective = [&](std::span<const double> theta) {
    return half_t_log_css(w, decode(theta, p, q), t0, scratch);
  };
  const SimplexResult res = nelder_mead(objective, std::vector<double>(dim, 0.0),
                                        0.25, 1e-12, 4000);
  if (!res.converged)
    throw EstimationFailure(strformat(
        "fit_arima: no convergence within %zu simplex iterations for order "
        "(%zu, %zu); best objective %.6g",
        res.iterations, p, q, res.f));
  const NaturalParams best_w = decode(res.x, p, q);

  ArimaFit fit;
  fit.offset = t0;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  const double ar_sum =
      std::accumulate(best_w.ar.begin(), best_w.ar.end(), 0.0);
  fit.model.ar = best_w.ar;
  fit.model.ma = best_w.ma;
  fit.model.c = s * best_w.c + xbar * (1.0 - ar_sum);

  css_residuals(w, best_w.c, best_w.ar, best_w.ma, t0, scratch);
  const std::size_t T = scratch.size();
  fit.residuals.resize(T);
  for (std::size_t i = 0; i < T; ++i) fit.residuals[i] = s * scratch[i];
  const double css_w = sum_sq(scratch);
  fit.model.innovation_variance = s * s * css_w / static_cast<double>(T);
  // Profiled Gaussian log-likelihood in the original units.
  fit.loglik = -0.5 * static_cast<double>(T) *
                   (std::log(2.0 * std::numbers::pi * css_w / static_cast<double>(T)) + 1.0) -
               static_cast<double>(T) * std::log(s);
  fit.aic = 2.0 * static_cast<double>(p + q + 2) - 2.0 * fit.loglik;

  NaturalParams best_x = best_w;
  best_x.c = fit.model.c;
  fit.se = hessian_se(samples, best_x, t0);
  return fit;
}

ArimaFit fit_arima(const TimeSeries& series, std::size_t p, std::size_t q) {
  return fit_arima(series.samples(), p, q);
}

ArimaFit fit_arima_auto(const TimeSeries& series, std::size_t max_p, std::size_t max_q) {
  bool have = false;
  ArimaFit best;
  std::string last_error;
  for (std::size_t p = 0; p <= max_p; ++p)
    for (std::size_t q = 0; q <= max_q; ++q) {
      try {
        ArimaFit fit = fit_arima(series, p, q);
        if (!have || fit.aic < best.aic) {
          best = std::move(fit);
          have = true;
        }
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
  if (!have)
    throw EstimationFailure("fit_arima_auto: every candidate order failed: " + last_error);
  return best;
}

}  // namespace evtail
