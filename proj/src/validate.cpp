#include "evtail/validate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "evtail/error.hpp"
#include "evtail/optim.hpp"
#include "evtail/parallel.hpp"
#include "evtail/stats.hpp"
#include "evtail/strfmt.hpp"

namespace evtail {

namespace {

void fill_deviation_stats(ProbabilityPlotData& plot) {
  double worst = 0.0;
  double ss = 0.0;
  for (const auto& [emp, mod] : plot.points) {
    const double d = std::fabs(emp - mod);
    worst = std::max(worst, d);
    ss += d * d;
  }
  plot.max_abs_dev = worst;
  plot.rmse_dev = std::sqrt(ss / static_cast<double>(plot.points.size()));
}

}  // namespace

ProbabilityPlotData pp_points(const GpdFit& fit, std::span<const double> excess_in) {
  if (excess_in.size() < 3)
    throw InsufficientData("pp_points: need at least 3 excesses");
  std::vector<double> y(excess_in.begin(), excess_in.end());
  std::sort(y.begin(), y.end());
  if (y.front() < 0.0)
    throw InvalidArgument("pp_points: excesses must be nonnegative");

  ProbabilityPlotData plot;
  plot.kind = PlotKind::Pp;
  plot.points.reserve(y.size());
  const double denom = static_cast<double>(y.size()) + 1.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    plot.points.emplace_back(static_cast<double>(i + 1) / denom,
                             gpd_cdf(fit.params, y[i]));
  fill_deviation_stats(plot);
  return plot;
}

ProbabilityPlotData qq_points(const GpdFit& fit, std::span<const double> samples,
                              double u) {
  std::vector<double> x;
  for (double v : samples)
    if (v < u) x.push_back(v);
  if (x.size() < 3)
    throw InsufficientData("qq_points: need at least 3 sub-threshold samples");
  std::sort(x.begin(), x.end());

  ProbabilityPlotData plot;
  plot.kind = PlotKind::Qq;
  plot.points.reserve(x.size());
  const double denom = static_cast<double>(x.size()) + 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // The i-th smallest sub-threshold sample sits at conditional probability
    // i/(k+1), i.e. at depth 1 - i/(k+1) into the excess distribution.
    const double p = static_cast<double>(i + 1) / denom;
    plot.points.emplace_back(x[i], u - gpd_quantile(fit.params, 1.0 - p));
  }
  fill_deviation_stats(plot);
  return plot;
}

// ---------------------------------------------------------------------------
// Composite CDF

namespace {

// Unscaled Gaussian-kernel empirical CDF over the sorted reference sample.
// Points further than 8 bandwidths contribute 0 or 1 to machine precision.
double kernel_cdf_raw(const KernelCdf& k, double x) {
  const std::vector<double>& s = k.sample;
  const auto lo = std::lower_bound(s.begin(), s.end(), x - 8.0 * k.bandwidth);
  const auto hi = std::upper_bound(lo, s.end(), x + 8.0 * k.bandwidth);
  double acc = static_cast<double>(lo - s.begin());
  for (auto it = lo; it != hi; ++it) acc += normal_cdf((x - *it) / k.bandwidth);
  return acc / static_cast<double>(s.size());
}

double silverman_bandwidth(const std::vector<double>& sorted) {
  const double sd = stddev(sorted);
  const double iqr =
      empirical_quantile(sorted, 0.75) - empirical_quantile(sorted, 0.25);
  const double spread = (iqr > 0.0) ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread *
         std::pow(static_cast<double>(sorted.size()), -0.2);
}

}  // namespace

CompositeCdfModel build_composite(std::span<const double> samples,
                                  const GpdFit& lower_fit, const GpdFit& upper_fit,
                                  double bandwidth) {
  CompositeCdfModel model;
  model.lower = lower_fit;
  model.upper = upper_fit;
  model.u_low = lower_fit.params.u;
  model.zeta_low = lower_fit.zeta;
  model.u_high = -upper_fit.params.u;  // upper tail is fitted on the negated series
  model.zeta_high = upper_fit.zeta;

  if (!(model.u_low < model.u_high))
    throw InvalidArgument(
        strformat("build_composite: lower threshold %.6g must sit below the "
                  "upper threshold %.6g",
                  model.u_low, model.u_high));
  if (!(model.zeta_low > 0.0) || !(model.zeta_high > 0.0) ||
      !(model.zeta_low + model.zeta_high < 1.0))
    throw InvalidArgument(
        strformat("build_composite: tail fractions %.4g + %.4g must leave "
                  "room for the interior",
                  model.zeta_low, model.zeta_high));

  std::vector<double>& interior = model.interior.sample;
  for (double v : samples)
    if (v > model.u_low && v < model.u_high) interior.push_back(v);
  if (interior.size() < 2)
    throw InsufficientData("build_composite: fewer than 2 interior samples");
  std::sort(interior.begin(), interior.end());

  model.interior.bandwidth =
      bandwidth > 0.0 ? bandwidth : silverman_bandwidth(interior);
  if (!(model.interior.bandwidth > 0.0))
    throw EstimationFailure("build_composite: interior sample has no spread");

  // Pin the kernel CDF to both junction anchors with an affine map.
  const double at_low = kernel_cdf_raw(model.interior, model.u_low);
  const double at_high = kernel_cdf_raw(model.interior, model.u_high);
  const double denom = at_high - at_low;
  if (!(denom > 1e-12))
    throw EstimationFailure(
        strformat("build_composite: kernel CDF is flat across the interior "
                  "(%.6g at u_low, %.6g at u_high)",
                  at_low, at_high));
  model.interior.scale =
      (1.0 - model.zeta_high - model.zeta_low) / denom;
  model.interior.offset = model.zeta_low - model.interior.scale * at_low;

  for (double u : {model.u_low, model.u_high}) {
    const double side = (u == model.u_low)
                            ? tail_cdf(model.lower, u)
                            : 1.0 - tail_cdf(model.upper, -u);
    const double inner =
        model.interior.offset + model.interior.scale * kernel_cdf_raw(model.interior, u);
    if (std::fabs(side - inner) > 1e-9)
      throw EstimationFailure(
          strformat("build_composite: junction mismatch %.3g at %.6g after "
                    "rescaling",
                    std::fabs(side - inner), u));
  }
  return model;
}

double composite_cdf(const CompositeCdfModel& model, double x) {
  if (x < model.u_low) return tail_cdf(model.lower, x);
  if (x > model.u_high) return 1.0 - tail_cdf(model.upper, -x);
  return model.interior.offset +
         model.interior.scale * kernel_cdf_raw(model.interior, x);
}

// ---------------------------------------------------------------------------
// Parametric families

const char* family_name(Family family) {
  switch (family) {
    case Family::Weibull: return "weibull";
    case Family::Rician: return "rician";
    case Family::Lognormal: return "lognormal";
    case Family::Nakagami: return "nakagami";
    case Family::Normal: return "normal";
  }
  throw InvalidArgument("family_name: unknown family");
}

namespace {

struct Mle {
  std::array<double, 2> params;
  double loglik;
};

void require_positive(std::span<const double> x, Family family) {
  for (double v : x)
    if (!(v > 0.0))
      throw InvalidArgument(strformat(
          "fit_parametric: %s requires strictly positive samples",
          family_name(family)));
}

Mle fit_weibull(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double xmax = *std::max_element(x.begin(), x.end());
  double mean_log = 0.0;
  for (double v : x) mean_log += std::log(v);
  mean_log /= n;

  // Profile likelihood equation for the shape; scaling by xmax keeps the
  // powers bounded.  The left side grows from -inf to max(log x) - mean(log x).
  const auto profile = [&](double k) {
    double sw = 0.0, swl = 0.0;
    for (double v : x) {
      const double w = std::pow(v / xmax, k);
      sw += w;
      swl += w * std::log(v);
    }
    return swl / sw - 1.0 / k - mean_log;
  };
  double hi = 1.0;
  int guard = 0;
  while (profile(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 60)
      throw EstimationFailure("fit_parametric: weibull shape search diverged");
  }
  const double shape = bisect_root(profile, 1e-3, hi, 1e-12);

  double sw = 0.0;
  for (double v : x) sw += std::pow(v / xmax, shape);
  const double scale = xmax * std::pow(sw / n, 1.0 / shape);

  double ll = n * (std::log(shape) - shape * std::log(scale));
  for (double v : x)
    ll += (shape - 1.0) * std::log(v) - std::pow(v / scale, shape);
  return {{shape, scale}, ll};
}

Mle fit_lognormal(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  std::vector<double> l(x.size());
  std::transform(x.begin(), x.end(), l.begin(),
                 [](double v) { return std::log(v); });
  const double mu = mean(l);
  double s2 = 0.0;
  for (double v : l) s2 += (v - mu) * (v - mu);
  s2 /= n;
  if (!(s2 > 0.0))
    throw EstimationFailure("fit_parametric: lognormal sample has no spread");
  const double sd = std::sqrt(s2);
  double sum_log = 0.0;
  for (double v : l) sum_log += v;
  const double ll =
      -0.5 * n * std::log(2.0 * M_PI) - n * std::log(sd) - sum_log - 0.5 * n;
  return {{mu, sd}, ll};
}

Mle fit_normal_family(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mu = mean(x);
  double s2 = 0.0;
  for (double v : x) s2 += (v - mu) * (v - mu);
  s2 /= n;
  if (!(s2 > 0.0))
    throw EstimationFailure("fit_parametric: normal sample has no spread");
  const double ll = -0.5 * n * (std::log(2.0 * M_PI * s2) + 1.0);
  return {{mu, std::sqrt(s2)}, ll};
}

Mle fit_nakagami(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double omega = 0.0, mean_log_q = 0.0, sum_log = 0.0;
  for (double v : x) {
    omega += v * v;
    mean_log_q += 2.0 * std::log(v);
    sum_log += std::log(v);
  }
  omega /= n;
  mean_log_q /= n;
  const double s = std::log(omega) - mean_log_q;  // >= 0 by Jensen
  if (!(s > 0.0))
    throw EstimationFailure("fit_parametric: nakagami sample has no spread");

  // x^2 is Gamma(m, omega/m), so the shape solves log m - psi(m) = s.
  const auto shape_eq = [&](double m) { return std::log(m) - digamma(m) - s; };
  double hi = std::max(1.0, (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) /
                                (12.0 * s));
  int guard = 0;
  while (shape_eq(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 60)
      throw EstimationFailure("fit_parametric: nakagami shape search diverged");
  }
  const double m = bisect_root(shape_eq, 1e-6, hi, 1e-12);

  const double ll = n * (std::log(2.0) + m * std::log(m) - std::lgamma(m) -
                         m * std::log(omega) - m) +
                    (2.0 * m - 1.0) * sum_log;
  return {{m, omega}, ll};
}

Mle fit_rician(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= n;
  m4 /= n;

  // Work on data scaled to unit second moment so the simplex steps suit both
  // coordinates.
  const double c = std::sqrt(m2);
  std::vector<double> z(x.size());
  std::transform(x.begin(), x.end(), z.begin(), [&](double v) { return v / c; });

  // Even-moment start: E z^2 = a^2 + 2 b^2 and E z^4 = a^4 + 8 a^2 b^2 + 8 b^4
  // give a^4 = 2 (E z^2)^2 - E z^4.
  const double a4 = 2.0 - m4 / (m2 * m2);
  double a0 = a4 > 0.0 ? std::pow(a4, 0.25) : 0.1;
  double b0 = std::sqrt(std::max((1.0 - a0 * a0) / 2.0, 0.05));

  const auto nll = [&](const std::vector<double>& t) {
    const double nu = std::fabs(t[0]);
    const double sig = std::exp(t[1]);
    const double inv2 = 1.0 / (sig * sig);
    double acc = 0.0;
    for (double v : z)
      acc -= std::log(v) - 2.0 * std::log(sig) -
             0.5 * (v * v + nu * nu) * inv2 + log_bessel_i0(v * nu * inv2);
    return acc;
  };
  const SimplexResult res = nelder_mead(nll, {a0, std::log(b0)}, 0.2, 1e-12, 4000);
  if (!res.converged)
    throw EstimationFailure("fit_parametric: rician likelihood did not converge");

  const double nu = c * std::fabs(res.x[0]);
  const double sigma = c * std::exp(res.x[1]);
  const double ll = -res.f - n * std::log(c);
  return {{nu, sigma}, ll};
}

}  // namespace

ParametricFit fit_parametric(std::span<const double> data, Family family) {
  if (data.size() < 50)
    throw InsufficientData(strformat(
        "fit_parametric: need at least 50 samples, got %zu", data.size()));
  if (family != Family::Normal) require_positive(data, family);

  Mle mle{};
  switch (family) {
    case Family::Weibull: mle = fit_weibull(data); break;
    case Family::Rician: mle = fit_rician(data); break;
    case Family::Lognormal: mle = fit_lognormal(data); break;
    case Family::Nakagami: mle = fit_nakagami(data); break;
    case Family::Normal: mle = fit_normal_family(data); break;
  }

  ParametricFit fit;
  fit.family = family;
  fit.params = mle.params;
  fit.loglik = mle.loglik;
  fit.n = data.size();
  const double k_params = 2.0;
  fit.aic = 2.0 * k_params - 2.0 * mle.loglik;
  fit.bic = k_params * std::log(static_cast<double>(data.size())) - 2.0 * mle.loglik;
  return fit;
}

double parametric_cdf(const ParametricFit& fit, double x) {
  const double a = fit.params[0];
  const double b = fit.params[1];
  switch (fit.family) {
    case Family::Weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / b, a));
    case Family::Rician: {
      if (x <= 0.0) return 0.0;
      // (X/sigma)^2 is noncentral chi-squared with 2 dof and (nu/sigma)^2.
      const double q = x / b;
      const double lam = (a / b) * (a / b);
      return noncentral_chi_squared_cdf(2.0, lam, q * q);
    }
    case Family::Lognormal:
      return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - a) / b);
    case Family::Nakagami:
      return x <= 0.0 ? 0.0 : gamma_p(a, a * x * x / b);
    case Family::Normal:
      return normal_cdf((x - a) / b);
  }
  throw InvalidArgument("parametric_cdf: unknown family");
}

ModelSelection select_best_fit(std::span<const double> data,
                               std::span<const Family> families) {
  if (families.empty())
    throw InvalidArgument("select_best_fit: no families requested");

  std::vector<std::optional<ParametricFit>> fits(families.size());
  std::vector<std::string> notes(families.size());
  parallel_for(families.size(), [&](std::size_t i) {
    try {
      fits[i] = fit_parametric(data, families[i]);
    } catch (const std::exception& e) {
      notes[i] = strformat("%s: %s", family_name(families[i]), e.what());
    }
  });

  ModelSelection sel;
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (fits[i])
      sel.candidates.push_back(*fits[i]);
    else
      sel.failures.push_back(notes[i]);
  }
  if (sel.candidates.empty()) {
    std::string msg = "select_best_fit: every family failed";
    for (const std::string& note : sel.failures) msg += "; " + note;
    throw EstimationFailure(msg);
  }

  double aic_min = sel.candidates.front().aic;
  for (const ParametricFit& c : sel.candidates) aic_min = std::min(aic_min, c.aic);
  // Candidates within two AIC units are statistically interchangeable;
  // re-rank that set by BIC, keeping the first listed on exact ties.
  const ParametricFit* best = nullptr;
  for (const ParametricFit& c : sel.candidates) {
    if (c.aic - aic_min >= 2.0) continue;
    if (best == nullptr || c.bic < best->bic) best = &c;
  }
  sel.best = *best;
  return sel;
}

std::vector<std::pair<double, double>> extrapolate_tail(
    const ParametricFit& fit, std::span<const double> probe_points) {
  std::vector<std::pair<double, double>> out;
  out.reserve(probe_points.size());
  for (double x : probe_points) out.emplace_back(x, parametric_cdf(fit, x));
  return out;
}

double rmse_cdf(const std::function<double(double)>& model_cdf,
                std::span<const double> samples, CdfRegion region) {
  if (samples.empty()) throw InvalidArgument("rmse_cdf: empty sample");
  if (!(region.cdf_min >= 0.0) || !(region.cdf_max <= 1.0) ||
      !(region.cdf_min <= region.cdf_max))
    throw InvalidArgument("rmse_cdf: malformed region");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double emp = static_cast<double>(i + 1) / n;
    if (emp < region.cdf_min || emp > region.cdf_max) continue;
    const double d = model_cdf(sorted[i]) - emp;
    ss += d * d;
    ++count;
  }
  if (count == 0)
    throw InvalidArgument("rmse_cdf: no order statistics inside the region");
  return std::sqrt(ss / static_cast<double>(count));
}

std::vector<double> region_by_empirical_cdf(std::span<const double> samples,
                                            double cdf_min, double cdf_max) {
  if (!(cdf_min >= 0.0) || !(cdf_max <= 1.0) || !(cdf_min <= cdf_max))
    throw InvalidArgument("region_by_empirical_cdf: malformed bounds");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double emp = static_cast<double>(i + 1) / n;
    if (emp >= cdf_min && emp <= cdf_max) out.push_back(sorted[i]);
  }
  return out;
}

std::vector<double> region_first_observations(std::span<const double> samples,
                                              std::size_t count) {
  if (count == 0)
    throw InvalidArgument("region_first_observations: count must be positive");
  const std::size_t take = std::min(count, samples.size());
  return {samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take)};
}

}  // namespace evtail
