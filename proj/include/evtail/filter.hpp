#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "evtail/arima.hpp"
#include "evtail/garch.hpp"
#include "evtail/series.hpp"

namespace evtail {

struct FilterConfig {
  // Negative p or q requests an AIC search up to max_order in that slot.
  int p = -1;
  int q = -1;
  std::size_t max_order = 3;
  std::size_t d = 0;  // differencing applied before the mean equation
  std::size_t iid_max_lag = 50;
  double iid_threshold = 0.05;
  // Sanity bands on the standardized residuals; violations mean the filter
  // did not whiten the series and the result should not be trusted.
  double max_abs_mean = 0.05;
  double max_var_error = 0.10;
};

struct FilteredResiduals {
  TimeSeries z;  // standardized residuals, dimensionless
  ArimaFit arima;
  GarchFit garch;
  IidDiagnostics diagnostics;
  std::size_t offset = 0;  // raw samples consumed before the first z value
  double z_mean = 0.0;
  double z_variance = 0.0;
  std::string note;
};

// Removes serial dependence by fitting the mean equation, then the conditional
// variance of its innovations, and standardizing.  Throws EstimationFailure
// when the standardized residuals fail the mean/variance sanity bands.
FilteredResiduals arima_garch_pipeline(const TimeSeries& series,
                                       const FilterConfig& config = {});

}  // namespace evtail
