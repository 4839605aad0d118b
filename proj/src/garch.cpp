#include "evtail/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "evtail/error.hpp"
#include "evtail/strfmt.hpp"
#include "evtail/optim.hpp"
#include "evtail/stats.hpp"

namespace evtail {

void validate(const GarchModel& m) {
  if (!(m.k > 0.0) || !std::isfinite(m.k))
    throw InvalidArgument("garch: k must be positive");
  if (!(m.gamma >= 0.0 && m.gamma < 1.0))
    throw InvalidArgument("garch: gamma must lie in [0, 1)");
  if (m.phi + m.psi < 0.0 || m.phi - m.psi < 0.0)
    throw InvalidArgument("garch: innovation loads phi +- psi must be nonnegative");
  if (!(m.gamma + m.phi + 0.5 * m.psi < 1.0))
    throw InvalidArgument("garch: gamma + phi + psi/2 must be below 1");
}

std::vector<double> garch_variance_path(std::span<const double> residuals,
                                        const GarchModel& model, double s2_0) {
  if (residuals.empty()) throw InsufficientData("garch_variance_path: empty input");
  if (!(s2_0 > 0.0)) s2_0 = std::max(variance(residuals), 1e-300);
  std::vector<double> s2(residuals.size());
  s2[0] = s2_0;
  for (std::size_t t = 1; t < residuals.size(); ++t) {
    const double e = residuals[t - 1];
    const double sign_term = e < 0.0 ? 1.0 : (e > 0.0 ? -1.0 : 0.0);
    s2[t] = model.k + model.gamma * s2[t - 1] +
            (model.phi + model.psi * sign_term) * e * e;
  }
  return s2;
}

namespace {

// Optimizer coordinates: x = [log k, logit gamma, log(phi - psi), log(phi + psi)].
// The two exponentials keep the squared-innovation load positive for either
// sign of the previous residual, so the variance recursion cannot go negative.
GarchModel decode(std::span<const double> x) {
  GarchModel m;
  m.k = std::exp(x[0]);
  m.gamma = 1.0 / (1.0 + std::exp(-x[1]));
  const double a_pos = std::exp(x[2]);
  const double a_neg = std::exp(x[3]);
  m.phi = 0.5 * (a_pos + a_neg);
  m.psi = 0.5 * (a_neg - a_pos);
  return m;
}

double gaussian_nll(std::span<const double> e, const GarchModel& m, double s2_0) {
  const double persistence = m.gamma + m.phi + 0.5 * m.psi;
  if (persistence >= 1.0 - 1e-10) return 1e12 * (1.0 + persistence);
  double nll = 0.0;
  double s2 = s2_0;
  for (std::size_t t = 0; t < e.size(); ++t) {
    if (t > 0) {
      const double prev = e[t - 1];
      const double sign_term = prev < 0.0 ? 1.0 : (prev > 0.0 ? -1.0 : 0.0);
      s2 = m.k + m.gamma * s2 + (m.phi + m.psi * sign_term) * prev * prev;
    }
    if (!(s2 > 0.0) || !std::isfinite(s2)) return 1e12;
    nll += 0.5 * (std::log(2.0 * std::numbers::pi * s2) + e[t] * e[t] / s2);
  }
  return std::isfinite(nll) ? nll : 1e12;
}

std::vector<double> hessian_se(std::span<const double> e, const GarchModel& opt,
                               double s2_0) {
  const std::vector<double> theta{opt.k, opt.gamma, opt.phi, opt.psi};
  const std::size_t d = 4;
  const auto f = [&](const std::vector<double>& t) {
    const GarchModel m{t[0], t[1], t[2], t[3]};
    if (!(m.k > 0.0) || m.phi + m.psi < 0.0 || m.phi - m.psi < 0.0 ||
        m.gamma < 0.0)
      return std::numeric_limits<double>::quiet_NaN();
    return gaussian_nll(e, m, s2_0);
  };
  std::vector<double> h(d);
  h[0] = 1e-4 * std::max(opt.k, 1e-8);
  h[1] = 1e-4;
  h[2] = 1e-4;
  h[3] = 1e-4;
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
  bool finite = true;
  for (double v : H)
    if (!std::isfinite(v)) finite = false;
  if (finite && invert_inplace(H, d))
    for (std::size_t i = 0; i < d; ++i)
      if (H[i * d + i] > 0.0) se[i] = std::sqrt(H[i * d + i]);
  return se;
}

}  // namespace

GarchFit fit_garch(std::span<const double> residuals) {
  if (residuals.size() < 500)
    throw InsufficientData(strformat(
        "fit_garch: %zu residuals, need at least 500", residuals.size()));
  for (double v : residuals)
    if (!std::isfinite(v)) throw InvalidArgument("fit_garch: non-finite residual");
  const double var = variance(residuals);
  if (!(var > 0.0)) throw EstimationFailure("fit_garch: residuals are constant");

  const double s2_0 = var;
  const auto objective = [&](std::span<const double> x) {
    return gaussian_nll(residuals, decode(x), s2_0);
  };
  // Start at moderate persistence with symmetric loads scaled to the data.
  const std::vector<double> start{std::log(0.05 * var), std::log(0.8 / 0.2),
                                  std::log(0.10), std::log(0.10)};
  const SimplexResult res = nelder_mead(objective, start, 0.5, 1e-8, 2000);

  GarchFit fit;
  fit.model = decode(res.x);
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.sigma2 = garch_variance_path(residuals, fit.model, s2_0);
  fit.z.resize(residuals.size());
  for (std::size_t t = 0; t < residuals.size(); ++t)
    fit.z[t] = residuals[t] / std::sqrt(fit.sigma2[t]);
  fit.loglik = -gaussian_nll(residuals, fit.model, s2_0);
  // With loads this small the variance path is flat at k / (1 - gamma): treat
  // the series as conditionally homoskedastic.  The band absorbs estimation
  // noise, which shrinks like 1/sqrt(T).
  const double load_floor =
      std::max(0.01, 4.0 / std::sqrt(static_cast<double>(residuals.size())));
  fit.heteroskedastic =
      fit.model.phi + std::abs(fit.model.psi) >= load_floor;
  fit.se = hessian_se(residuals, fit.model, s2_0);
  return fit;
}

}  // namespace evtail
