#include "evtail/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "evtail/error.hpp"

namespace evtail {

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("variance: empty input");
  if (v.size() == 1) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("empirical_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("empirical_quantile: p outside [0, 1]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double w = h - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

double normal_log_cdf(double z) {
  // erfc underflows near z = -37.5; switch to the asymptotic tail expansion.
  if (z > -37.0) {
    const double p = normal_cdf(z);
    if (p > 0.0) return std::log(p);
  }
  const double z2 = z * z;
  return -0.5 * z2 - 0.5 * std::log(2.0 * M_PI) - std::log(-z) + std::log1p(-1.0 / z2);
}

double normal_quantile(double p) {
  // Acklam's rational approximation polished by one Halley step.
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p outside (0, 1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("student_t_quantile: p outside (0, 1)");
  if (!(nu > 0.0)) throw InvalidArgument("student_t_quantile: nu must be positive");
  return boost::math::quantile(boost::math::students_t(nu), p);
}

double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }

double noncentral_chi_squared_cdf(double dof, double lambda, double x) {
  if (!(dof > 0.0) || !(lambda >= 0.0))
    throw InvalidArgument("noncentral_chi_squared_cdf: bad parameters");
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::non_central_chi_squared(dof, lambda), x);
}

double digamma(double x) { return boost::math::digamma(x); }

double log_bessel_i0(double x) {
  x = std::fabs(x);
  if (x < 50.0) return std::log(boost::math::cyl_bessel_i(0, x));
  // Asymptotic: I0(x) ~ exp(x)/sqrt(2 pi x) * (1 + 1/(8x) + 9/(128x^2) + ...)
  const double r = 1.0 / x;
  const double series = 1.0 + r * (0.125 + r * (0.0703125 + r * 0.0732421875));
  return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(series);
}

LineFit fit_line_r2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_line_r2: size mismatch");
  if (x.size() < 2) throw InvalidArgument("fit_line_r2: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw InvalidArgument("fit_line_r2: x has zero variance");
  if (syy <= 0.0) return {0.0, my, 1.0};  // flat data: a line explains it exactly
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = syy - fit.slope * sxy;
  fit.r2 = 1.0 - std::max(0.0, ss_res) / syy;
  return fit;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b, double fb,
             double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(a, fa, b, fb, fm);
  const double tol = std::max(std::fabs(whole), 1.0e-300) * rel_tol + 1.0e-300;
  return adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

bool invert_inplace(std::vector<double>& a, std::size_t n) {
  if (a.size() != n * n) throw InvalidArgument("invert_inplace: size mismatch");
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (!(std::fabs(a[piv * n + col]) > 0.0) || !std::isfinite(a[piv * n + col]))
      return false;
    if (piv != col)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[piv * n + j], a[col * n + j]);
        std::swap(inv[piv * n + j], inv[col * n + j]);
      }
    const double d = a[col * n + col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] /= d;
      inv[col * n + j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r * n + col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] -= factor * a[col * n + j];
        inv[r * n + j] -= factor * inv[col * n + j];
      }
    }
  }
  a = std::move(inv);
  return true;
}

}  // namespace evtail
