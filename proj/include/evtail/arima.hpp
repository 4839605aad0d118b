#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evtail/series.hpp"

namespace evtail {

struct ArimaModel {
  std::vector<double> ar;  // x_t = c + sum ar_i x_{t-i} + sum ma_j e_{t-j} + e_t
  std::vector<double> ma;
  std::size_t d = 0;  // differencing applied upstream of the mean equation
  double c = 0.0;
  double innovation_variance = 1.0;
};

// True iff the polynomial 1 - sum coeff_i z^i has no roots inside or on the
// unit circle (checked through the reflection-coefficient recursion).
bool is_stationary(std::span<const double> ar_coefficients);
bool is_invertible(std::span<const double> ma_coefficients);

// Step-up (Levinson) recursion from partial autocorrelations to AR
// coefficients; the result is stationary exactly when every input lies in
// (-1, 1).  The optimizer feeds this through tanh to get an unconstrained
// parameterization; exposed for tests.
std::vector<double> pacf_to_ar(std::span<const double> pacf);

struct ArimaFit {
  ArimaModel model;
  std::vector<double> residuals;  // innovations for t >= offset
  std::size_t offset = 0;         // samples at the head conditioned on, not fitted
  double loglik = 0.0;
  double aic = 0.0;
  std::vector<double> se;  // c, ar..., ma...; NaN when the curvature is unusable
  std::size_t iterations = 0;
  bool converged = false;
};

// Conditional (least-squares) Gaussian fit of an ARMA(p, q) with intercept.
ArimaFit fit_arima(std::span<const double> samples, std::size_t p, std::size_t q);
ArimaFit fit_arima(const TimeSeries& series, std::size_t p, std::size_t q);

// Order search over p, q in [0, max_p] x [0, max_q] by smallest AIC.
ArimaFit fit_arima_auto(const TimeSeries& series, std::size_t max_p = 3,
                        std::size_t max_q = 3);

}  // namespace evtail
