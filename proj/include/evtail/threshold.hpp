#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtail/gpd.hpp"
#include "evtail/series.hpp"

namespace evtail {

// Candidate thresholds: n_points values equally spaced on (min, mean], i.e.
// min + step, min + 2*step, ..., mean.  The sample minimum itself is excluded
// so every candidate keeps at least one exceedance.
std::vector<double> threshold_grid(std::span<const double> samples, std::size_t n_points);
std::vector<double> threshold_grid(const TimeSeries& series, std::size_t n_points);

struct MrlPoint {
  double u = 0.0;
  double mean_excess = 0.0;
  std::size_t k = 0;
  double se = 0.0;  // standard error of the mean excess, sd / sqrt(k)
};

struct MrlCurve {
  std::vector<MrlPoint> points;    // k >= k_min, ascending u
  std::vector<MrlPoint> excluded;  // dropped for lack of exceedances
};

MrlCurve mrl_curve(std::span<const double> samples, std::span<const double> grid,
                   std::size_t k_min);
MrlCurve mrl_curve(const TimeSeries& series, std::span<const double> grid,
                   std::size_t k_min);

struct StabilityPoint {
  double u = 0.0;
  std::size_t k = 0;
  double xi = 0.0;
  double se_xi = 0.0;
  double sigma_star = 0.0;  // fitted scale adjusted to be threshold-invariant
  double se_sigma_star = 0.0;  // delta-method error of sigma + xi*u
  bool regular = false;
};

struct StabilityCurves {
  std::vector<StabilityPoint> points;
  std::vector<MrlPoint> excluded;      // u/k of grid points without a usable fit
  std::vector<std::string> notes;      // one note per excluded point
};

StabilityCurves stability_curves(std::span<const double> samples,
                                 std::span<const double> grid, std::size_t k_min,
                                 std::size_t n_total, unsigned n_threads = 0);
StabilityCurves stability_curves(const TimeSeries& series,
                                 std::span<const double> grid, std::size_t k_min,
                                 unsigned n_threads = 0);

enum class ThresholdMethod { MeanExcess, Stability, Combined, None };
enum class ThresholdStatus { Decided, Deferred, Infeasible };

struct ThresholdDecision {
  ThresholdStatus status = ThresholdStatus::Infeasible;
  std::optional<double> u0;
  ThresholdMethod method = ThresholdMethod::None;
  double r2_mrl = 0.0;
  double r2_xi = 0.0;
  double r2_sigma_star = 0.0;
  std::string rationale;
};

// Linearity check behind both threshold rules.  Raw R^2 punishes curves whose
// variation is pure estimation noise (a flat-within-noise curve is a line for
// every practical purpose, like the zero-variance case fit_line_r2 already
// treats as perfect), so the residual sum of squares is first discounted by
// the expected contribution of the per-point standard errors:
//   r2_eff = 1 - max(0, ss_res - (1 - 2/m) * sum(se_i^2)) / ss_tot.
// With all se zero this is exactly the raw R^2.
double noise_floored_r2(std::span<const double> x, std::span<const double> y,
                        std::span<const double> se);

// Largest u0 such that the mean-excess curve restricted to u <= u0 is linear
// with noise-floored R^2 >= r2_min.  If the whole curve qualifies the decision
// is deferred: a globally linear curve cannot distinguish candidate
// thresholds by itself.
ThresholdDecision mrl_threshold(const MrlCurve& curve, double r2_min = 0.95,
                                std::size_t min_prefix = 3);

// Same prefix rule applied jointly to the shape and the adjusted-scale curve;
// both must be linear over u <= u0.  The full curve passing selects the top of
// the grid (estimates stable over the whole scanned range).
ThresholdDecision stability_threshold(const StabilityCurves& curves,
                                      double r2_min = 0.95,
                                      std::size_t min_prefix = 3);

struct ThresholdConfig {
  std::size_t n_points = 40;
  std::size_t k_min = 30;
  double r2_min = 0.95;
  std::size_t min_prefix = 3;
  std::size_t iid_max_lag = 50;
  double iid_threshold = 0.05;
  unsigned n_threads = 0;
};

struct ThresholdSelection {
  ThresholdDecision decision;
  MrlCurve mrl;
  StabilityCurves stability;
  ThresholdDecision mrl_decision;
  ThresholdDecision stability_decision;
  bool input_iid = true;  // serial dependence warning only; selection proceeds
  std::string warning;
};

// Combines both diagnostics: when both decide, the more conservative (deeper)
// threshold wins; a deferred mean-excess decision falls through to stability,
// and if stability is also inconclusive the globally linear curve licenses the
// shallowest scanned threshold.
ThresholdSelection select_threshold(const TimeSeries& series,
                                    const ThresholdConfig& config = {});

}  // namespace evtail
