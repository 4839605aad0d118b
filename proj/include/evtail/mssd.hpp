#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evtail/series.hpp"
#include "evtail/threshold.hpp"

namespace evtail {

// Draws `size` samples with replacement.  Deterministic given the generator
// state, so parallel callers derive one generator per task.
std::vector<double> bootstrap_resample(std::span<const double> source, std::size_t size,
                                       std::mt19937_64& rng);
TimeSeries bootstrap_resample(const TimeSeries& source, std::size_t size,
                              std::mt19937_64& rng);

// Anderson-Darling normality p-value with both parameters estimated from the
// sample: A^2 gets the (1 + 0.75/n + 2.25/n^2) small-sample modification and
// the standard four-branch exponential-polynomial mapping to p.
double ad_normality_p(std::span<const double> sample);

// Smallest prefix size on the stride grid whose tail fit at the carried
// exceedance fraction is regular (shape above -0.5).  Prefixes with fewer
// than min_excesses exceedances are skipped, not errors.
std::optional<std::size_t> min_regular_size(std::span<const double> samples, double zeta,
                                            std::size_t stride,
                                            std::size_t min_excesses = 2);

struct MssdConfig {
  double alpha = 0.05;        // critical value the lower bound must clear
  std::size_t M = 20;         // first-step bootstrap sets
  std::size_t K = 50;         // second-step sets per (set, size) pair
  std::size_t n0 = 0;         // start size; 0 derives it from the data
  std::size_t grid_stride = 0;  // 0 spreads grid_points sizes over [n0, n]
  std::size_t grid_points = 15;
  double m = 1e6;             // return period of the tested level
  double confidence = 0.95;   // one-sided t quantile for the lower bound
  std::uint64_t seed = 1;
  std::size_t min_excesses = 2;     // per-cell fit floor
  double missing_tolerance = 0.20;  // fraction of failed cells a size survives
  unsigned n_threads = 0;
  ThresholdConfig threshold;  // threshold selection, run once on the input
};

struct MssdSizeRow {
  std::size_t j = 0;
  double p_bar = 0.0;
  double s = 0.0;
  double lower = 0.0;  // p_bar - t_star * s / sqrt(usable sets): t bound on the mean p
  double gain = 0.0;   // s_j - s_{j0}, meaningful once j0 is set and j >= j0
  std::size_t missing_cells = 0;  // of M * K
  bool excluded = false;
  std::string note;
};

enum class MssdVerdict { Feasible, Infeasible };

struct MssdReport {
  std::vector<MssdSizeRow> rows;  // every grid size, excluded ones flagged
  std::optional<std::size_t> j0;
  MssdVerdict verdict = MssdVerdict::Infeasible;
  double t_star = 0.0;  // one-sided Student-t quantile, M - 1 dof
  double alpha = 0.05;
  std::size_t M = 0;
  std::size_t K = 0;
  double m = 0.0;
  double u0 = 0.0;    // threshold chosen on the full series
  double zeta0 = 0.0;  // carried exceedance fraction
  std::size_t n0 = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string note;
};

// Two-step bootstrap minimum-sample-size determination: per first-step set
// and grid size, the spread of second-step return levels is tested for
// normality; j0 is the smallest size from which the mean p-value stays above
// alpha by t_star standard deviations for the rest of the grid.
MssdReport mssd(const TimeSeries& series, const MssdConfig& config = {});

}  // namespace evtail
