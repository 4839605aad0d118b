#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evtail {

// Generalized Pareto model for threshold excesses.  The analysis looks at the
// lower tail: for a threshold u and a sample x < u the excess is y = u - x,
// and H(y) = 1 - (1 + xi*y/sigma)^(-1/xi)  (xi != 0, exponential limit at 0).
// Upper-tail work reuses the same machinery on the negated series.
struct GpdParams {
  double xi = 0.0;     // shape; support is [0, inf) for xi >= 0, [0, -sigma/xi] otherwise
  double sigma = 1.0;  // scale at the threshold, > 0
  double u = 0.0;      // threshold the excesses were taken against
};

struct GpdFit {
  GpdParams params;
  std::size_t k = 0;     // number of excesses used
  double zeta = 0.0;     // exceedance fraction k / n
  double loglik = 0.0;
  double se_xi = 0.0;
  double se_sigma = 0.0;
  double cov_xi_sigma = 0.0;  // off-diagonal of the inverse observed information
  bool regular = false;      // xi > -0.5, the usual MLE asymptotics apply
  bool se_available = false;
  bool at_bound = false;     // optimum at the edge of the searched shape range
};

// Excesses u - x over all samples x < u, input order preserved.
std::vector<double> excesses(std::span<const double> samples, double u);

// H(y); exact 1 at and beyond the upper endpoint when xi < 0.
double gpd_cdf(const GpdParams& params, double y);

// Survival 1 - H(y), computed in log space so deep-tail values keep
// relative accuracy.
double gpd_survival(const GpdParams& params, double y);

// Inverse of gpd_cdf on p in [0, 1).
double gpd_quantile(const GpdParams& params, double p);

// Sum of log densities; -inf when any excess falls outside the support.
double gpd_log_likelihood(const GpdParams& params, std::span<const double> excess_values);

// Maximum-likelihood fit on k >= 2 excesses.  n_total is the size of the
// sample the excesses were drawn from (sets zeta = k / n_total).
GpdFit fit_gpd(std::span<const double> excess_values, double u, std::size_t n_total);

double mean_excess(std::span<const double> excess_values);
double mean_excess(std::span<const double> samples, double u);

// sigma + xi * u: invariant across valid thresholds for a fixed tail.
double modified_scale(const GpdParams& params);

// Level crossed once every m observations on average: requires m * zeta >= 1.
double return_level(const GpdFit& fit, double m);

// Pr{X < x} for x at or below the threshold.
double tail_cdf(const GpdFit& fit, double x);

}  // namespace evtail
