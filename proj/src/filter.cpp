#include "evtail/filter.hpp"

#include <cmath>
#include <utility>

#include "evtail/error.hpp"
#include "evtail/strfmt.hpp"
#include "evtail/stats.hpp"

namespace evtail {

FilteredResiduals arima_garch_pipeline(const TimeSeries& series,
                                       const FilterConfig& config) {
  const TimeSeries* input = &series;
  TimeSeries differenced = series;
  if (config.d > 0) {
    differenced = difference(series, config.d);
    input = &differenced;
  }

  ArimaFit arima =
      (config.p >= 0 && config.q >= 0)
          ? fit_arima(*input, static_cast<std::size_t>(config.p),
                      static_cast<std::size_t>(config.q))
          : fit_arima_auto(*input, config.max_order, config.max_order);
  arima.model.d = config.d;
  GarchFit garch = fit_garch(arima.residuals);

  TimeSeries z(garch.z, series.interval_ms(), Unit::Dimensionless);
  const double z_mean = mean(z.samples());
  const double z_variance = variance(z.samples());
  if (std::abs(z_mean) > config.max_abs_mean ||
      std::abs(z_variance - 1.0) > config.max_var_error)
    throw EstimationFailure(strformat(
        "arima_garch_pipeline: standardized residuals out of band "
        "(mean %.4f, variance %.4f); the filter did not whiten the series",
        z_mean, z_variance));

  const std::size_t lag =
      std::min(config.iid_max_lag, z.size() > 1 ? z.size() - 1 : 1);
  IidDiagnostics diagnostics = is_iid(z, lag, config.iid_threshold);
  const std::size_t offset = config.d + arima.offset;
  std::string note =
      garch.heteroskedastic
          ? std::string{}
          : "no conditional heteroskedasticity detected; the variance filter "
            "is a constant rescale";
  return FilteredResiduals{std::move(z),           std::move(arima),
                           std::move(garch),       std::move(diagnostics),
                           offset,                 z_mean,
                           z_variance,             std::move(note)};
}

}  // namespace evtail
