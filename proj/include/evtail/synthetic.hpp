#pragma once

#include <cstdint>
#include <vector>

#include "evtail/series.hpp"

namespace evtail {

enum class SyntheticFamily {
  GpdTailSplice,  // body with an exact generalized-Pareto lower tail glued below u_star
  Exponential,
  Weibull,
  Rician,
  Rayleigh,
  ArmaGjr,        // ARMA mean equation driven by GJR-GARCH(1,1) innovations
  WhiteNoise,
};

// Generation parameters double as the ground-truth record for tests.
struct SyntheticSpec {
  SyntheticFamily family = SyntheticFamily::WhiteNoise;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  // gpd_tail_splice: with probability zeta_star a sample is u_star minus a
  // GPD(xi, sigma) draw, otherwise a normal(body_mean, body_sd) draw
  // truncated to [u_star, inf).
  double xi = 0.0;
  double sigma = 1.0;
  double u_star = 0.0;
  double zeta_star = 0.0;
  double body_mean = 0.0;
  double body_sd = 1.0;

  double scale = 1.0;  // exponential / weibull / rayleigh scale, rician sigma, noise sd
  double shape = 1.0;  // weibull shape
  double nu = 0.0;     // rician line-of-sight amplitude

  std::vector<double> ar;  // arma_gjr mean equation
  std::vector<double> ma;
  double c = 0.0;
  double g_k = 1.0;  // GJR variance equation
  double g_gamma = 0.0;
  double g_phi = 0.0;
  double g_psi = 0.0;
  std::size_t burn_in = 1000;

  double interval_ms = 1.0;
  Unit unit = Unit::Dimensionless;

  static SyntheticSpec white_noise(std::size_t n, std::uint64_t seed, double mean = 0.0,
                                   double sd = 1.0);
  static SyntheticSpec exponential(std::size_t n, std::uint64_t seed, double scale = 1.0);
  static SyntheticSpec weibull(std::size_t n, std::uint64_t seed, double shape, double scale);
  static SyntheticSpec rician(std::size_t n, std::uint64_t seed, double nu, double sigma);
  static SyntheticSpec rayleigh(std::size_t n, std::uint64_t seed, double sigma);
  static SyntheticSpec gpd_tail_splice(std::size_t n, std::uint64_t seed, double xi, double sigma,
                                       double u_star, double zeta_star, double body_mean = 0.0,
                                       double body_sd = 1.0);
  static SyntheticSpec arma_gjr(std::size_t n, std::uint64_t seed, std::vector<double> ar,
                                std::vector<double> ma, double c, double g_k, double g_gamma,
                                double g_phi, double g_psi);
};

struct SyntheticData {
  TimeSeries series;
  SyntheticSpec truth;
};

SyntheticData generate(const SyntheticSpec& spec);

}  // namespace evtail
