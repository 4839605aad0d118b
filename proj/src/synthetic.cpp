#include "evtail/synthetic.hpp"

#include <cmath>

#include "evtail/error.hpp"
#include "evtail/rng.hpp"
#include "evtail/stats.hpp"

namespace evtail {

SyntheticSpec SyntheticSpec::white_noise(std::size_t n, std::uint64_t seed, double mean,
                                         double sd) {
  SyntheticSpec s;
  s.family = SyntheticFamily::WhiteNoise;
  s.n = n;
  s.seed = seed;
  s.body_mean = mean;
  s.scale = sd;
  return s;
}

SyntheticSpec SyntheticSpec::exponential(std::size_t n, std::uint64_t seed, double scale) {
  SyntheticSpec s;
  s.family = SyntheticFamily::Exponential;
  s.n = n;
  s.seed = seed;
  s.scale = scale;
  return s;
}

SyntheticSpec SyntheticSpec::weibull(std::size_t n, std::uint64_t seed, double shape,
                                     double scale) {
  SyntheticSpec s;
  s.family = SyntheticFamily::Weibull;
  s.n = n;
  s.seed = seed;
  s.shape = shape;
  s.scale = scale;
  return s;
}

SyntheticSpec SyntheticSpec::rician(std::size_t n, std::uint64_t seed, double nu, double sigma) {
  SyntheticSpec s;
  s.family = SyntheticFamily::Rician;
  s.n = n;
  s.seed = seed;
  s.nu = nu;
  s.scale = sigma;
  return s;
}

SyntheticSpec SyntheticSpec::rayleigh(std::size_t n, std::uint64_t seed, double sigma) {
  SyntheticSpec s;
  s.family = SyntheticFamily::Rayleigh;
  s.n = n;
  s.seed = seed;
  s.scale = sigma;
  return s;
}

SyntheticSpec SyntheticSpec::gpd_tail_splice(std::size_t n, std::uint64_t seed, double xi,
                                             double sigma, double u_star, double zeta_star,
                                             double body_mean, double body_sd) {
  SyntheticSpec s;
  s.family = SyntheticFamily::GpdTailSplice;
  s.n = n;
  s.seed = seed;
  s.xi = xi;
  s.sigma = sigma;
  s.u_star = u_star;
  s.zeta_star = zeta_star;
  s.body_mean = body_mean;
  s.body_sd = body_sd;
  return s;
}

SyntheticSpec SyntheticSpec::arma_gjr(std::size_t n, std::uint64_t seed, std::vector<double> ar,
                                      std::vector<double> ma, double c, double g_k,
                                      double g_gamma, double g_phi, double g_psi) {
  SyntheticSpec s;
  s.family = SyntheticFamily::ArmaGjr;
  s.n = n;
  s.seed = seed;
  s.ar = std::move(ar);
  s.ma = std::move(ma);
  s.c = c;
  s.g_k = g_k;
  s.g_gamma = g_gamma;
  s.g_phi = g_phi;
  s.g_psi = g_psi;
  return s;
}

namespace {

// Inverse-transform GPD draw, written out here so the generator does not
// share a code path with the fitted-model CDF it is used to test.
double gpd_draw(double xi, double sigma, double p) {
  if (std::fabs(xi) < 1e-12) return -sigma * std::log1p(-p);
  return sigma / xi * (std::pow(1.0 - p, -xi) - 1.0);
}

double truncated_normal_above(double mean, double sd, double floor, double p) {
  const double alpha = normal_cdf((floor - mean) / sd);
  const double q = alpha + p * (1.0 - alpha);
  return mean + sd * normal_quantile(std::min(q, 1.0 - 1e-16));
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("generate: n must be positive");
  const auto family_id = static_cast<std::uint64_t>(spec.family);
  const CounterRng rng(stream_key(spec.seed, family_id, 0));

  std::vector<double> x(spec.n);
  switch (spec.family) {
    case SyntheticFamily::WhiteNoise: {
      if (!(spec.scale > 0.0)) throw InvalidArgument("generate: noise sd must be positive");
      for (std::size_t i = 0; i < spec.n; ++i)
        x[i] = spec.body_mean + spec.scale * rng.normal(i);
      break;
    }
    case SyntheticFamily::Exponential: {
      if (!(spec.scale > 0.0)) throw InvalidArgument("generate: scale must be positive");
      for (std::size_t i = 0; i < spec.n; ++i) x[i] = spec.scale * rng.exponential(i);
      break;
    }
    case SyntheticFamily::Weibull: {
      if (!(spec.scale > 0.0 && spec.shape > 0.0))
        throw InvalidArgument("generate: weibull shape and scale must be positive");
      for (std::size_t i = 0; i < spec.n; ++i)
        x[i] = spec.scale * std::pow(rng.exponential(i), 1.0 / spec.shape);
      break;
    }
    case SyntheticFamily::Rayleigh: {
      if (!(spec.scale > 0.0)) throw InvalidArgument("generate: scale must be positive");
      for (std::size_t i = 0; i < spec.n; ++i)
        x[i] = spec.scale * std::sqrt(2.0 * rng.exponential(i));
      break;
    }
    case SyntheticFamily::Rician: {
      if (!(spec.scale > 0.0 && spec.nu >= 0.0))
        throw InvalidArgument("generate: rician needs sigma > 0 and nu >= 0");
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double a = spec.nu + spec.scale * rng.normal(2 * i);
        const double b = spec.scale * rng.normal(2 * i + 1);
        x[i] = std::sqrt(a * a + b * b);
      }
      break;
    }
    case SyntheticFamily::GpdTailSplice: {
      if (!(spec.sigma > 0.0)) throw InvalidArgument("generate: splice sigma must be positive");
      if (!(spec.zeta_star > 0.0 && spec.zeta_star < 1.0))
        throw InvalidArgument("generate: splice zeta_star outside (0, 1)");
      if (!(spec.body_sd > 0.0)) throw InvalidArgument("generate: body sd must be positive");
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double pick = rng.uniform(2 * i);
        const double p = rng.uniform(2 * i + 1);
        if (pick < spec.zeta_star)
          x[i] = spec.u_star - gpd_draw(spec.xi, spec.sigma, p);
        else
          x[i] = truncated_normal_above(spec.body_mean, spec.body_sd, spec.u_star, p);
      }
      break;
    }
    case SyntheticFamily::ArmaGjr: {
      if (!(spec.g_k > 0.0)) throw InvalidArgument("generate: g_k must be positive");
      const double persist = spec.g_gamma + spec.g_phi;
      if (!(persist < 1.0)) throw InvalidArgument("generate: variance recursion not stationary");
      const std::size_t p = spec.ar.size(), q = spec.ma.size();
      const std::size_t total = spec.n + spec.burn_in;
      std::vector<double> eps(total, 0.0), series(total, 0.0);
      double var = spec.g_k / (1.0 - persist);
      double prev_eps = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) {
          const double sgn_term = (prev_eps < 0.0) ? 1.0 : (prev_eps > 0.0 ? -1.0 : 0.0);
          var = spec.g_k + spec.g_gamma * var +
                (spec.g_phi + spec.g_psi * sgn_term) * prev_eps * prev_eps;
        }
        if (!(var > 0.0)) throw EstimationFailure("generate: variance recursion went nonpositive");
        const double e = std::sqrt(var) * rng.normal(t);
        double value = spec.c + e;
        for (std::size_t i = 1; i <= p && i <= t; ++i) value += spec.ar[i - 1] * series[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) value += spec.ma[j - 1] * eps[t - j];
        eps[t] = e;
        series[t] = value;
        prev_eps = e;
      }
      x.assign(series.begin() + static_cast<std::ptrdiff_t>(spec.burn_in), series.end());
      break;
    }
  }
  return {TimeSeries(std::move(x), spec.interval_ms, spec.unit), spec};
}

}  // namespace evtail
