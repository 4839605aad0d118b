#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evtail {

enum class Unit { Dbm, MilliWatt, Dimensionless };

std::string unit_name(Unit unit);
Unit unit_from_name(const std::string& name);

// Regularly sampled scalar series.  Construction validates that every sample
// is finite and the sampling interval is positive.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> samples, double interval_ms = 1.0,
                      Unit unit = Unit::Dimensionless);

  const std::vector<double>& samples() const { return samples_; }
  double interval_ms() const { return interval_ms_; }
  Unit unit() const { return unit_; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<double> samples_;
  double interval_ms_;
  Unit unit_;
};

struct AcfResult {
  std::vector<double> correlations;  // lags 0..max_lag
  double bound = 0.0;                // +-1.96 / sqrt(n)
};

// Biased (divide-by-n) sample autocorrelation of the mean-removed series.
// A constant series has correlation 1 at lag 0 and 0 elsewhere.
AcfResult acf(const TimeSeries& series, std::size_t max_lag);

// acf of the element-wise square of the mean-removed series; picks up
// volatility clustering that the plain acf misses.
AcfResult acf_squared(const TimeSeries& series, std::size_t max_lag);

struct IidDiagnostics {
  bool iid = false;
  double bound = 0.0;
  double violation_fraction = 0.0;          // plain acf, lags 1..max_lag
  double squared_violation_fraction = 0.0;  // squared-series acf
  std::vector<std::size_t> violating_lags;
  std::vector<std::size_t> squared_violating_lags;
};

// A series passes when at most max_violation_fraction of lags 1..max_lag sit
// outside the confidence bound, for both the plain and the squared acf.
IidDiagnostics is_iid(const TimeSeries& series, std::size_t max_lag,
                      double max_violation_fraction = 0.05);

enum class PowerTransform { Sqrt, Cbrt, Log };

// Variance-stabilizing preprocessing.  Domain violations report the first
// offending sample index.
TimeSeries power_transform(const TimeSeries& series, PowerTransform kind);

// Forward difference x_t - x_{t+d}; output has n - d samples.  Orders above 2
// are unusual enough to require the explicit override.
TimeSeries difference(const TimeSeries& series, std::size_t d, bool allow_high_order = false);

}  // namespace evtail
