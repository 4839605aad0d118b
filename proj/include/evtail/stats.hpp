#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace evtail {

double mean(std::span<const double> v);
// Unbiased (n-1) sample variance; n == 1 gives 0.
double variance(std::span<const double> v);
double stddev(std::span<const double> v);

// Empirical quantile with linear interpolation between order statistics
// (type-7 convention); p in [0, 1].
double empirical_quantile(std::span<const double> sorted, double p);

// Standard normal CDF, its log (stable deep into the lower tail), and inverse.
double normal_cdf(double z);
double normal_log_cdf(double z);
double normal_quantile(double p);

// One-sided Student-t quantile, nu degrees of freedom.
double student_t_quantile(double p, double nu);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// CDF of the noncentral chi-squared with dof degrees of freedom and
// noncentrality lambda, evaluated at x.
double noncentral_chi_squared_cdf(double dof, double lambda, double x);

double digamma(double x);

// log I0(x), the modified Bessel function of order zero, safe for large x.
double log_bessel_i0(double x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares with intercept.  Zero variance in y is reported as
// a perfect fit (r2 = 1, slope 0); zero variance in x is an error.
LineFit fit_line_r2(std::span<const double> x, std::span<const double> y);

// Adaptive Simpson quadrature of f on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, int max_depth = 40);

// Inverts a dense row-major n x n matrix in place (Gauss-Jordan with partial
// pivoting); returns false and leaves the contents unspecified when singular.
bool invert_inplace(std::vector<double>& a, std::size_t n);

}  // namespace evtail
