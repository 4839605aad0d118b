#include "evtail/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evtail/error.hpp"
#include "evtail/optim.hpp"
#include "evtail/stats.hpp"

namespace evtail {

namespace {

constexpr double kXiZeroEps = 1e-8;   // below this |xi| the exponential branch is used
constexpr double kXiLo = -0.99;       // searched shape range
constexpr double kXiHi = 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_params(const GpdParams& p, const char* who) {
  if (!(p.sigma > 0.0)) throw InvalidArgument(std::string(who) + ": sigma must be positive");
  if (!std::isfinite(p.xi)) throw InvalidArgument(std::string(who) + ": xi must be finite");
}

}  // namespace

std::vector<double> excesses(std::span<const double> samples, double u) {
  std::vector<double> out;
  for (double x : samples)
    if (x < u) out.push_back(u - x);
  return out;
}

double gpd_survival(const GpdParams& params, double y) {
  check_params(params, "gpd_survival");
  if (y <= 0.0) return 1.0;
  if (std::fabs(params.xi) < kXiZeroEps) return std::exp(-y / params.sigma);
  const double z = 1.0 + params.xi * y / params.sigma;
  if (z <= 0.0) return 0.0;  // at or past the upper endpoint (xi < 0)
  return std::exp(-std::log(z) / params.xi);
}

double gpd_cdf(const GpdParams& params, double y) {
  const double s = gpd_survival(params, y);
  return std::min(1.0, std::max(0.0, 1.0 - s));
}

double gpd_quantile(const GpdParams& params, double p) {
  check_params(params, "gpd_quantile");
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("gpd_quantile: p outside [0, 1)");
  if (p == 0.0) return 0.0;
  if (std::fabs(params.xi) < kXiZeroEps) return -params.sigma * std::log1p(-p);
  return params.sigma / params.xi * std::expm1(-params.xi * std::log1p(-p));
}

double gpd_log_likelihood(const GpdParams& params, std::span<const double> excess_values) {
  check_params(params, "gpd_log_likelihood");
  const double log_sigma = std::log(params.sigma);
  double ll = 0.0;
  if (std::fabs(params.xi) < kXiZeroEps) {
    for (double y : excess_values) {
      if (y < 0.0) return -kInf;
      ll += -log_sigma - y / params.sigma;
    }
    return ll;
  }
  const double a = 1.0 + 1.0 / params.xi;
  for (double y : excess_values) {
    if (y < 0.0) return -kInf;
    const double z = 1.0 + params.xi * y / params.sigma;
    if (z <= 0.0) return -kInf;
    ll += -log_sigma - a * std::log(z);
  }
  return ll;
}

namespace {

// Profile reduction: for tau = xi/sigma the likelihood equations pin
// xi(tau) = mean log(1 + tau y) and sigma = xi/tau, collapsing the fit to a
// one-dimensional search over tau in (-1/max(y), inf).
struct Profile {
  const std::vector<double>& y;
  double y_mean;

  double xi_at(double tau) const {
    double s = 0.0;
    for (double v : y) s += std::log1p(tau * v);
    return s / static_cast<double>(y.size());
  }

  // Negative profile log-likelihood divided by k.
  double nll(double tau) const {
    if (std::fabs(tau) < 1e-12) return std::log(y_mean) + 1.0;
    const double xi = xi_at(tau);
    const double sigma = xi / tau;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return kInf;
    return std::log(sigma) + xi + 1.0;
  }
};

}  // namespace

GpdFit fit_gpd(std::span<const double> excess_values, double u, std::size_t n_total) {
  const std::size_t k = excess_values.size();
  if (k < 2) throw InsufficientData("fit_gpd: need at least 2 excesses, got " + std::to_string(k));
  if (n_total < k) throw InvalidArgument("fit_gpd: n_total smaller than the excess count");

  std::vector<double> y(excess_values.begin(), excess_values.end());
  double y_max = 0.0;
  for (double v : y) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("fit_gpd: excesses must be finite and nonnegative");
    y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) throw EstimationFailure("fit_gpd: all excesses are zero");

  Profile prof{y, mean(y)};

  // tau range matching the searched shape range [kXiLo, kXiHi].
  const double tau_support = -1.0 / y_max;
  double tau_lo = tau_support * (1.0 - 1e-12);
  if (prof.xi_at(tau_lo) < kXiLo)
    tau_lo = bisect_root([&](double t) { return prof.xi_at(t) - kXiLo; }, tau_lo, 0.0,
                         std::fabs(tau_lo) * 1e-14);
  double tau_hi = 1.0 / prof.y_mean;
  for (int i = 0; i < 80 && prof.xi_at(tau_hi) < kXiHi; ++i) tau_hi *= 2.0;
  if (prof.xi_at(tau_hi) > kXiHi)
    tau_hi = bisect_root([&](double t) { return prof.xi_at(t) - kXiHi; },
                         1e-12 / prof.y_mean, tau_hi, tau_hi * 1e-14);

  // Coarse scan (linear over the negative side, logarithmic over the
  // positive side, plus the exponential limit), then a local polish.
  std::vector<double> grid;
  grid.push_back(0.0);
  const int n_neg = 48, n_pos = 48;
  for (int i = 0; i < n_neg; ++i)
    grid.push_back(tau_lo * (static_cast<double>(n_neg - i) / n_neg));
  const double log_hi = std::log(tau_hi), log_lo = log_hi - std::log(1e8);
  for (int i = 0; i < n_pos; ++i)
    grid.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / (n_pos - 1)));

  double best_tau = 0.0, best_nll = prof.nll(0.0);
  for (double t : grid) {
    const double v = prof.nll(t);
    if (v < best_nll) {
      best_nll = v;
      best_tau = t;
    }
  }

  // Bracket around the best grid point for Brent.
  double lo = tau_lo, hi = tau_hi;
  {
    std::vector<double> sorted(grid);
    std::sort(sorted.begin(), sorted.end());
    auto it = std::lower_bound(sorted.begin(), sorted.end(), best_tau);
    if (it != sorted.begin()) lo = *(it - 1);
    if (it + 1 != sorted.end()) hi = *(it + 1);
  }
  const double tau_tol = std::max(1e-14, 1e-12 * std::max(std::fabs(lo), std::fabs(hi)));
  const BrentResult opt = brent_minimize([&](double t) { return prof.nll(t); }, lo, hi, tau_tol);
  if (opt.f < best_nll) best_tau = opt.x;

  GpdFit fit;
  fit.k = k;
  fit.zeta = static_cast<double>(k) / static_cast<double>(n_total);
  fit.params.u = u;
  if (std::fabs(best_tau) < 1e-12) {
    fit.params.xi = 0.0;
    fit.params.sigma = prof.y_mean;
  } else {
    fit.params.xi = prof.xi_at(best_tau);
    fit.params.sigma = fit.params.xi / best_tau;
  }
  fit.at_bound = fit.params.xi <= kXiLo + 1e-9 || fit.params.xi >= kXiHi - 1e-9;
  fit.loglik = gpd_log_likelihood(fit.params, y);
  fit.regular = fit.params.xi > -0.5;

  if (fit.regular) {
    // Observed information from central differences of the log-likelihood.
    const double hx = 1e-5 * (1.0 + std::fabs(fit.params.xi));
    const double hs = 1e-5 * fit.params.sigma;
    auto ll = [&](double xi, double sigma) {
      return gpd_log_likelihood({xi, sigma, u}, y);
    };
    const double f0 = fit.loglik;
    const double dxx = (ll(fit.params.xi + hx, fit.params.sigma) - 2.0 * f0 +
                        ll(fit.params.xi - hx, fit.params.sigma)) / (hx * hx);
    const double dss = (ll(fit.params.xi, fit.params.sigma + hs) - 2.0 * f0 +
                        ll(fit.params.xi, fit.params.sigma - hs)) / (hs * hs);
    const double dxs = (ll(fit.params.xi + hx, fit.params.sigma + hs) -
                        ll(fit.params.xi + hx, fit.params.sigma - hs) -
                        ll(fit.params.xi - hx, fit.params.sigma + hs) +
                        ll(fit.params.xi - hx, fit.params.sigma - hs)) / (4.0 * hx * hs);
    const double det = dxx * dss - dxs * dxs;
    if (std::isfinite(det) && det > 0.0 && dxx < 0.0) {
      fit.se_xi = std::sqrt(-dss / det);
      fit.se_sigma = std::sqrt(-dxx / det);
      fit.cov_xi_sigma = dxs / det;
      fit.se_available = true;
    }
  }
  if (!fit.se_available) {
    fit.se_xi = kNan;
    fit.se_sigma = kNan;
    fit.cov_xi_sigma = kNan;
  }
  return fit;
}

double mean_excess(std::span<const double> excess_values) {
  if (excess_values.empty()) throw InsufficientData("mean_excess: no excesses");
  return mean(excess_values);
}

double mean_excess(std::span<const double> samples, double u) {
  const std::vector<double> y = excesses(samples, u);
  if (y.empty())
    throw InsufficientData("mean_excess: no samples below the threshold");
  return mean(y);
}

double modified_scale(const GpdParams& params) {
  check_params(params, "modified_scale");
  return params.sigma + params.xi * params.u;
}

double return_level(const GpdFit& fit, double m) {
  check_params(fit.params, "return_level");
  if (!(m > 0.0)) throw InvalidArgument("return_level: m must be positive");
  if (m * fit.zeta < 1.0)
    throw InvalidArgument("return_level: m * zeta < 1, level lies inside the bulk");
  const GpdParams& p = fit.params;
  if (std::fabs(p.xi) < kXiZeroEps) return p.u - p.sigma * std::log(m * fit.zeta);
  return p.u - p.sigma / p.xi * std::expm1(p.xi * std::log(m * fit.zeta));
}

double tail_cdf(const GpdFit& fit, double x) {
  check_params(fit.params, "tail_cdf");
  if (x > fit.params.u) throw InvalidArgument("tail_cdf: x above the threshold");
  return fit.zeta * gpd_survival(fit.params, fit.params.u - x);
}

}  // namespace evtail
