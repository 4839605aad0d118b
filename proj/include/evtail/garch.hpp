#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evtail/series.hpp"

namespace evtail {

// Conditional variance recursion with a sign-asymmetric innovation load:
//   s2_t = k + gamma * s2_{t-1} + (phi + psi * sgn(-e_{t-1})) * e_{t-1}^2
// so psi > 0 amplifies the response to negative innovations.
struct GarchModel {
  double k = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double psi = 0.0;
};

// Enforces k > 0, gamma in [0, 1), nonnegative loads on both innovation signs
// (phi + psi >= 0 and phi - psi >= 0, so the variance stays positive), and
// covariance stationarity gamma + phi + psi/2 < 1; throws InvalidArgument.
void validate(const GarchModel& model);

struct GarchFit {
  GarchModel model;
  std::vector<double> sigma2;  // conditional variances, one per input sample
  std::vector<double> z;       // standardized residuals e_t / sqrt(s2_t)
  double loglik = 0.0;
  std::vector<double> se;  // k, gamma, phi, psi; NaN when curvature unusable
  std::size_t iterations = 0;
  bool converged = false;
  // False when the fitted innovation loads are negligible, i.e. the series
  // shows no conditional heteroskedasticity and the filter reduces to a
  // constant rescale.
  bool heteroskedastic = true;
};

GarchFit fit_garch(std::span<const double> residuals);

// Conditional variance path for given parameters; s2_0 is the start-up value
// (sample variance when <= 0 is passed).
std::vector<double> garch_variance_path(std::span<const double> residuals,
                                        const GarchModel& model, double s2_0 = 0.0);

}  // namespace evtail
