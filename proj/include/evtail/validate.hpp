#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evtail/gpd.hpp"

namespace evtail {

// ---------------------------------------------------------------------------
// Probability plots

enum class PlotKind { Pp, Qq };

struct ProbabilityPlotData {
  PlotKind kind = PlotKind::Pp;
  // (empirical, modeled), sorted by the empirical coordinate.
  std::vector<std::pair<double, double>> points;
  double max_abs_dev = 0.0;
  double rmse_dev = 0.0;
};

// PP plot for a fitted tail: pairs (i/(k+1), H(y_(i))) over the sorted
// excesses.  On the diagonal when the model matches.
ProbabilityPlotData pp_points(const GpdFit& fit, std::span<const double> excesses);

// QQ plot in sample units: the i-th smallest sub-threshold sample against the
// modeled lower-tail quantile u - H^{-1}(1 - i/(k+1)).
ProbabilityPlotData qq_points(const GpdFit& fit, std::span<const double> samples,
                              double u);

// ---------------------------------------------------------------------------
// Composite distribution: GPD lower tail + kernel-smoothed interior + GPD
// upper tail (upper fitted on the negated series, same exceedance fraction).

struct KernelCdf {
  std::vector<double> sample;  // sorted interior reference sample
  double bandwidth = 0.0;
  double scale = 1.0;   // affine map pinning the kernel CDF to the junctions
  double offset = 0.0;
};

struct CompositeCdfModel {
  GpdFit lower;
  GpdFit upper;  // fitted on -x; its threshold is -u_high
  KernelCdf interior;
  double u_low = 0.0;
  double zeta_low = 0.0;
  double u_high = 0.0;
  double zeta_high = 0.0;
};

// bandwidth 0 selects Silverman's rule on the interior samples.
CompositeCdfModel build_composite(std::span<const double> samples,
                                  const GpdFit& lower_fit, const GpdFit& upper_fit,
                                  double bandwidth = 0.0);

double composite_cdf(const CompositeCdfModel& model, double x);

// ---------------------------------------------------------------------------
// Parametric baseline families

enum class Family { Weibull, Rician, Lognormal, Nakagami, Normal };

const char* family_name(Family family);

struct ParametricFit {
  Family family = Family::Normal;
  // Weibull (shape, scale); Rician (nu, sigma); Lognormal (mu of log,
  // sigma of log); Nakagami (m, omega); Normal (mean, sd).
  std::array<double, 2> params{0.0, 0.0};
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n = 0;
};

ParametricFit fit_parametric(std::span<const double> data, Family family);

double parametric_cdf(const ParametricFit& fit, double x);

struct ModelSelection {
  ParametricFit best;
  std::vector<ParametricFit> candidates;  // successful fits, in input order
  std::vector<std::string> failures;      // one note per family that failed
};

// Minimum AIC; candidates within two AIC units of the minimum are re-ranked
// by BIC; remaining ties go to the family listed first.
ModelSelection select_best_fit(std::span<const double> data,
                               std::span<const Family> families);

// Family CDF evaluated at the probe points; no refitting.
std::vector<std::pair<double, double>> extrapolate_tail(
    const ParametricFit& fit, std::span<const double> probe_points);

// ---------------------------------------------------------------------------
// Model comparison

struct CdfRegion {
  double cdf_min = 0.0;
  double cdf_max = 1e-2;  // default: the lower tail
};

// RMS difference between the model CDF and the empirical CDF i/n, taken at
// the order statistics whose empirical CDF falls inside the region.
double rmse_cdf(const std::function<double(double)>& model_cdf,
                std::span<const double> samples, CdfRegion region = {});

// Observations whose empirical CDF lies in [cdf_min, cdf_max]; ascending.
std::vector<double> region_by_empirical_cdf(std::span<const double> samples,
                                            double cdf_min = 1e-3,
                                            double cdf_max = 1.0);

// The first `count` observations in arrival order.
std::vector<double> region_first_observations(std::span<const double> samples,
                                              std::size_t count = 1000);

}  // namespace evtail
