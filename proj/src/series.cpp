#include "evtail/series.hpp"

#include <cmath>

#include "evtail/error.hpp"
#include "evtail/stats.hpp"

namespace evtail {

std::string unit_name(Unit unit) {
  switch (unit) {
    case Unit::Dbm: return "dBm";
    case Unit::MilliWatt: return "mW";
    case Unit::Dimensionless: return "dimensionless";
  }
  return "dimensionless";
}

Unit unit_from_name(const std::string& name) {
  if (name == "dBm" || name == "dbm") return Unit::Dbm;
  if (name == "mW" || name == "mw") return Unit::MilliWatt;
  if (name == "dimensionless" || name.empty()) return Unit::Dimensionless;
  throw InvalidArgument("unknown unit: " + name);
}

TimeSeries::TimeSeries(std::vector<double> samples, double interval_ms, Unit unit)
    : samples_(std::move(samples)), interval_ms_(interval_ms), unit_(unit) {
  if (samples_.empty()) throw InvalidArgument("TimeSeries: needs at least one sample");
  if (!(interval_ms_ > 0.0)) throw InvalidArgument("TimeSeries: interval must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i)
    if (!std::isfinite(samples_[i]))
      throw InvalidArgument("TimeSeries: non-finite sample at index " + std::to_string(i));
}

namespace {

AcfResult acf_of(const std::vector<double>& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  AcfResult result;
  result.bound = 1.96 / std::sqrt(static_cast<double>(n));
  result.correlations.assign(max_lag + 1, 0.0);
  result.correlations[0] = 1.0;

  const double m = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  if (c0 <= 0.0) return result;  // constant series

  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) c += (x[t] - m) * (x[t + lag] - m);
    result.correlations[lag] = c / c0;
  }
  return result;
}

}  // namespace

AcfResult acf(const TimeSeries& series, std::size_t max_lag) {
  if (max_lag >= series.size())
    throw InvalidArgument("acf: max_lag must be smaller than the series length");
  return acf_of(series.samples(), max_lag);
}

AcfResult acf_squared(const TimeSeries& series, std::size_t max_lag) {
  if (max_lag >= series.size())
    throw InvalidArgument("acf_squared: max_lag must be smaller than the series length");
  const double m = mean(series.samples());
  std::vector<double> sq(series.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double d = series.samples()[i] - m;
    sq[i] = d * d;
  }
  return acf_of(sq, max_lag);
}

IidDiagnostics is_iid(const TimeSeries& series, std::size_t max_lag,
                      double max_violation_fraction) {
  if (max_lag == 0) throw InvalidArgument("is_iid: max_lag must be at least 1");
  if (!(max_violation_fraction >= 0.0 && max_violation_fraction <= 1.0))
    throw InvalidArgument("is_iid: max_violation_fraction outside [0, 1]");

  const AcfResult plain = acf(series, max_lag);
  const AcfResult squared = acf_squared(series, max_lag);

  IidDiagnostics diag;
  diag.bound = plain.bound;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    if (std::fabs(plain.correlations[lag]) > plain.bound) diag.violating_lags.push_back(lag);
    if (std::fabs(squared.correlations[lag]) > squared.bound)
      diag.squared_violating_lags.push_back(lag);
  }
  const auto lags = static_cast<double>(max_lag);
  diag.violation_fraction = static_cast<double>(diag.violating_lags.size()) / lags;
  diag.squared_violation_fraction =
      static_cast<double>(diag.squared_violating_lags.size()) / lags;
  diag.iid = diag.violation_fraction <= max_violation_fraction &&
             diag.squared_violation_fraction <= max_violation_fraction;
  return diag;
}

TimeSeries power_transform(const TimeSeries& series, PowerTransform kind) {
  std::vector<double> out(series.size());
  const auto& x = series.samples();
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case PowerTransform::Sqrt:
        if (x[i] < 0.0)
          throw InvalidArgument("power_transform: sqrt of negative sample at index " +
                                std::to_string(i));
        out[i] = std::sqrt(x[i]);
        break;
      case PowerTransform::Cbrt:
        out[i] = std::cbrt(x[i]);
        break;
      case PowerTransform::Log:
        if (x[i] <= 0.0)
          throw InvalidArgument("power_transform: log of non-positive sample at index " +
                                std::to_string(i));
        out[i] = std::log(x[i]);
        break;
    }
  }
  return TimeSeries(std::move(out), series.interval_ms(), Unit::Dimensionless);
}

TimeSeries difference(const TimeSeries& series, std::size_t d, bool allow_high_order) {
  if (d == 0) throw InvalidArgument("difference: order must be at least 1");
  if (d > 2 && !allow_high_order)
    throw InvalidArgument("difference: order above 2 requires allow_high_order");
  if (d >= series.size())
    throw InvalidArgument("difference: order must be smaller than the series length");
  const auto& x = series.samples();
  std::vector<double> out(series.size() - d);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = x[t] - x[t + d];
  return TimeSeries(std::move(out), series.interval_ms(), series.unit());
}

}  // namespace evtail
