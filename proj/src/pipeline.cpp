#include "evtail/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <utility>

#include "evtail/error.hpp"
#include "evtail/stats.hpp"
#include "evtail/strfmt.hpp"
#include "json.hpp"

namespace evtail {

namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "1.0.0";

const char* threshold_method_name(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::MeanExcess: return "mean_excess";
    case ThresholdMethod::Stability: return "stability";
    case ThresholdMethod::Combined: return "combined";
    case ThresholdMethod::None: return "none";
  }
  return "none";
}

const char* threshold_status_name(ThresholdStatus status) {
  switch (status) {
    case ThresholdStatus::Decided: return "decided";
    case ThresholdStatus::Deferred: return "deferred";
    case ThresholdStatus::Infeasible: return "infeasible";
  }
  return "infeasible";
}

}  // namespace

const char* removal_mode_name(RemovalMode mode) {
  switch (mode) {
    case RemovalMode::Auto: return "auto";
    case RemovalMode::Declustering: return "declustering";
    case RemovalMode::ArimaGarch: return "arima_garch";
    case RemovalMode::None: return "none";
  }
  return "none";
}

RemovalMode removal_mode_from_name(const std::string& name) {
  if (name == "auto") return RemovalMode::Auto;
  if (name == "declustering" || name == "decluster") return RemovalMode::Declustering;
  if (name == "arima_garch" || name == "arima-garch" || name == "filter")
    return RemovalMode::ArimaGarch;
  if (name == "none") return RemovalMode::None;
  throw InvalidArgument(strformat("unknown removal mode '%s'", name.c_str()));
}

const char* pipeline_status_name(PipelineStatus status) {
  switch (status) {
    case PipelineStatus::Complete: return "complete";
    case PipelineStatus::CollectMoreData: return "collect_more_data";
    case PipelineStatus::Failed: return "failed";
  }
  return "failed";
}

void validate(const PipelineConfig& config) {
  if (!(config.threshold.r2_min > 0.0) || !(config.threshold.r2_min < 1.0))
    throw InvalidArgument(strformat("pipeline: r2_min %.4g must lie in (0, 1)",
                                    config.threshold.r2_min));
  if (config.probe_points < 2)
    throw InvalidArgument("pipeline: need at least 2 probe points");
  if (config.decluster_u_points < 2)
    throw InvalidArgument("pipeline: need at least 2 declustering thresholds");
  if (config.decluster_r.empty())
    throw InvalidArgument("pipeline: declustering run-length grid is empty");
  if (config.baselines.empty())
    throw InvalidArgument("pipeline: baseline family list is empty");
  if (!(config.baseline_cdf_min >= 0.0) || !(config.baseline_cdf_min < 1.0))
    throw InvalidArgument("pipeline: baseline_cdf_min must lie in [0, 1)");
  if (!(config.comparison.cdf_min >= 0.0) ||
      !(config.comparison.cdf_max <= 1.0) ||
      !(config.comparison.cdf_min < config.comparison.cdf_max))
    throw InvalidArgument("pipeline: malformed comparison region");
}

// ---------------------------------------------------------------------------
// Config hashing

namespace {

json config_to_json(const PipelineConfig& c) {
  json families = json::array();
  for (Family f : c.baselines) families.push_back(family_name(f));
  // output_dir is deliberately excluded: where the artifacts land does not
  // change what was computed.
  return {
      {"input_path", c.input_path},
      {"ingest",
       {{"format", static_cast<int>(c.ingest.format)},
        {"unit", unit_name(c.ingest.unit)},
        {"interval_ms", c.ingest.interval_ms}}},
      {"mode", removal_mode_name(c.mode)},
      {"threshold",
       {{"n_points", c.threshold.n_points},
        {"k_min", c.threshold.k_min},
        {"r2_min", c.threshold.r2_min},
        {"min_prefix", c.threshold.min_prefix},
        {"iid_max_lag", c.threshold.iid_max_lag},
        {"iid_threshold", c.threshold.iid_threshold}}},
      {"mssd",
       {{"alpha", c.mssd.alpha},
        {"M", c.mssd.M},
        {"K", c.mssd.K},
        {"n0", c.mssd.n0},
        {"grid_stride", c.mssd.grid_stride},
        {"grid_points", c.mssd.grid_points},
        {"m", c.mssd.m},
        {"confidence", c.mssd.confidence},
        {"min_excesses", c.mssd.min_excesses},
        {"missing_tolerance", c.mssd.missing_tolerance}}},
      {"filter",
       {{"p", c.filter.p},
        {"q", c.filter.q},
        {"max_order", c.filter.max_order},
        {"d", c.filter.d},
        {"max_abs_mean", c.filter.max_abs_mean},
        {"max_var_error", c.filter.max_var_error}}},
      {"decluster_u_points", c.decluster_u_points},
      {"decluster_r", c.decluster_r},
      {"baselines", families},
      {"baseline_cdf_min", c.baseline_cdf_min},
      {"comparison", {{"cdf_min", c.comparison.cdf_min}, {"cdf_max", c.comparison.cdf_max}}},
      {"probe_points", c.probe_points},
      {"seed", c.seed},
  };
}

}  // namespace

std::string config_hash(const PipelineConfig& config) {
  const std::string canon = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a
  for (unsigned char byte : canon) {
    h ^= byte;
    h *= 1099511628211ULL;
  }
  return strformat("%016llx", static_cast<unsigned long long>(h));
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

template <typename F>
bool run_stage(AnalysisReport& rep, const char* name, F&& body) {
  try {
    std::string message = body();
    rep.stages.push_back({name, true, std::move(message)});
    return true;
  } catch (const std::exception& e) {
    rep.stages.push_back({name, false, e.what()});
    rep.status = PipelineStatus::Failed;
    return false;
  }
}

std::size_t clamped_lag(std::size_t configured, std::size_t n) {
  const std::size_t cap = n > 8 ? n / 4 : 1;
  return std::max<std::size_t>(1, std::min(configured, cap));
}

}  // namespace

AnalysisReport run_pipeline(const TimeSeries& series, const PipelineConfig& config) {
  validate(config);

  AnalysisReport rep;
  rep.tool_version = kToolVersion;
  rep.config_hash = config_hash(config);
  rep.seed = config.seed;
  rep.n_input = series.size();
  rep.interval_ms = series.interval_ms();
  rep.unit = series.unit();
  rep.n_working = series.size();

  TimeSeries working = series;

  if (!run_stage(rep, "dependency-check", [&] {
        rep.dependency.input =
            is_iid(series, clamped_lag(config.threshold.iid_max_lag, series.size()),
                   config.threshold.iid_threshold);
        return strformat("iid=%s violations=%.3g squared=%.3g",
                         rep.dependency.input.iid ? "yes" : "no",
                         rep.dependency.input.violation_fraction,
                         rep.dependency.input.squared_violation_fraction);
      }))
    return rep;

  if (!run_stage(rep, "dependency-removal", [&] {
        const auto apply_filter = [&] {
          const FilteredResiduals fr = arima_garch_pipeline(series, config.filter);
          rep.dependency.arima = fr.arima;
          rep.dependency.garch = fr.garch;
          rep.dependency.after = fr.diagnostics;
          working = fr.z;
          rep.dependency.mode_used = RemovalMode::ArimaGarch;
          return fr.diagnostics.iid;
        };
        const auto apply_decluster = [&] {
          const std::vector<double> u_grid =
              threshold_grid(series, config.decluster_u_points);
          DeclusterConfig dc;
          dc.k_min = config.threshold.k_min;
          dc.iid_threshold = config.threshold.iid_threshold;
          dc.n_threads = config.threshold.n_threads;
          DeclusterSelection sel = select_decluster_params(
              series, u_grid, config.decluster_r, config.threshold.r2_min, dc);
          if (!sel.found)
            throw EstimationFailure(
                strformat("declustering found no usable (u, r): %s",
                          sel.rationale.c_str()));
          const DeclusterResult dr = decluster(series, sel.u, sel.r);
          working = TimeSeries(dr.minima, series.interval_ms(), series.unit());
          rep.dependency.decluster = std::move(sel);
          rep.dependency.mode_used = RemovalMode::Declustering;
          try {
            rep.dependency.after =
                is_iid(working, clamped_lag(config.threshold.iid_max_lag, working.size()),
                       config.threshold.iid_threshold);
          } catch (const std::exception& e) {
            rep.dependency.note = strformat("post-declustering diagnostics: %s", e.what());
          }
        };

        switch (config.mode) {
          case RemovalMode::None:
            rep.dependency.mode_used = RemovalMode::None;
            if (!rep.dependency.input.iid)
              rep.dependency.note =
                  "serial dependence left in place by explicit request";
            break;
          case RemovalMode::ArimaGarch:
            apply_filter();
            if (!rep.dependency.after->iid)
              rep.dependency.note =
                  "standardized residuals still show serial structure";
            break;
          case RemovalMode::Declustering:
            apply_decluster();
            break;
          case RemovalMode::Auto:
            if (rep.dependency.input.iid) {
              rep.dependency.mode_used = RemovalMode::None;
              rep.dependency.note = "input already independent";
              break;
            }
            try {
              if (!apply_filter()) {
                rep.dependency.note =
                    "filtered residuals still dependent; falling back to declustering";
                apply_decluster();
              }
            } catch (const std::exception& filter_error) {
              const std::string first = filter_error.what();
              try {
                apply_decluster();
                rep.dependency.note =
                    strformat("mean/variance filter failed (%s); declustered instead",
                              first.c_str());
              } catch (const std::exception& decluster_error) {
                throw EstimationFailure(strformat(
                    "both removal methods failed: filter: %s; declustering: %s",
                    first.c_str(), decluster_error.what()));
              }
            }
            break;
        }
        rep.n_working = working.size();
        return strformat("mode=%s n_working=%zu",
                         removal_mode_name(rep.dependency.mode_used), working.size());
      }))
    return rep;

  if (!run_stage(rep, "threshold-selection", [&] {
        rep.threshold = select_threshold(working, config.threshold);
        const ThresholdDecision& d = rep.threshold->decision;
        if (d.status != ThresholdStatus::Decided || !d.u0)
          throw EstimationFailure(strformat("no threshold decided: %s",
                                            d.rationale.c_str()));
        return strformat("u0=%.6g method=%s", *d.u0,
                         threshold_method_name(d.method));
      }))
    return rep;

  const double u0 = *rep.threshold->decision.u0;

  if (!run_stage(rep, "tail-fit", [&] {
        const std::vector<double> exc = excesses(working.samples(), u0);
        rep.tail = fit_gpd(exc, u0, working.size());
        return strformat("xi=%.4g sigma=%.4g k=%zu zeta=%.4g", rep.tail->params.xi,
                         rep.tail->params.sigma, rep.tail->k, rep.tail->zeta);
      }))
    return rep;

  if (!run_stage(rep, "sample-size", [&] {
        MssdConfig mc = config.mssd;
        mc.seed = config.seed;
        mc.threshold = config.threshold;
        rep.mssd = mssd(working, mc);
        if (rep.mssd->verdict == MssdVerdict::Feasible && rep.mssd->j0)
          return strformat("feasible j0=%zu of n=%zu", *rep.mssd->j0, rep.mssd->n);
        return std::string("infeasible: ") + rep.mssd->note;
      }))
    return rep;

  if (rep.mssd->verdict != MssdVerdict::Feasible || !rep.mssd->j0 ||
      *rep.mssd->j0 > rep.n_working) {
    const std::size_t base = rep.mssd->n0 > 0 ? rep.mssd->n0 : rep.n_working;
    rep.required_additional_samples = std::max<std::size_t>(1, (base + 9) / 10);
    rep.status = PipelineStatus::CollectMoreData;
    rep.stages.push_back(
        {"verdict", true,
         strformat("collect at least %zu more samples before trusting the tail",
                   rep.required_additional_samples)});
    return rep;
  }

  if (!run_stage(rep, "validation", [&] {
        const std::vector<double> exc = excesses(working.samples(), u0);
        rep.pp = pp_points(*rep.tail, exc);
        rep.qq = qq_points(*rep.tail, working.samples(), u0);
        return strformat("pp_max_dev=%.4g qq_max_dev=%.4g", rep.pp->max_abs_dev,
                         rep.qq->max_abs_dev);
      }))
    return rep;

  if (!run_stage(rep, "composite-model", [&] {
        std::vector<double> neg(working.samples().size());
        std::transform(working.samples().begin(), working.samples().end(),
                       neg.begin(), [](double v) { return -v; });
        std::vector<double> neg_sorted(neg);
        std::sort(neg_sorted.begin(), neg_sorted.end());
        const double u_neg = empirical_quantile(neg_sorted, rep.tail->zeta);
        rep.upper_tail = fit_gpd(excesses(neg, u_neg), u_neg, neg.size());
        rep.composite = build_composite(working.samples(), *rep.tail, *rep.upper_tail);
        return strformat("junctions at %.6g and %.6g", rep.composite->u_low,
                         rep.composite->u_high);
      }))
    return rep;

  if (!run_stage(rep, "baseline-comparison", [&] {
        std::vector<Family> families = config.baselines;
        std::string narrow_note;
        const double lo =
            *std::min_element(working.samples().begin(), working.samples().end());
        if (lo <= 0.0) {
          families = {Family::Normal};
          narrow_note = "; non-positive data narrowed baselines to normal";
        }
        const std::vector<double> body = region_by_empirical_cdf(
            working.samples(), config.baseline_cdf_min, 1.0);
        rep.baselines = select_best_fit(body, families);

        ComparisonTable table;
        table.region = config.comparison;
        const CompositeCdfModel& model = *rep.composite;
        table.models.push_back(
            {"composite", false, {0.0, 0.0},
             rmse_cdf([&](double x) { return composite_cdf(model, x); },
                      working.samples(), config.comparison)});
        for (const ParametricFit& fit : rep.baselines->candidates)
          table.models.push_back(
              {family_name(fit.family), true, fit.params,
               rmse_cdf([&](double x) { return parametric_cdf(fit, x); },
                        working.samples(), config.comparison)});

        std::vector<double> sorted(working.samples());
        std::sort(sorted.begin(), sorted.end());
        table.column_names = {"x", "empirical"};
        table.column_names.push_back("composite");
        for (const ParametricFit& fit : rep.baselines->candidates)
          table.column_names.push_back(family_name(fit.family));
        table.rows.reserve(config.probe_points);
        for (std::size_t i = 0; i < config.probe_points; ++i) {
          const double p = (static_cast<double>(i) + 0.5) /
                           static_cast<double>(config.probe_points);
          const double x = empirical_quantile(sorted, p);
          std::vector<double> row{x, p, composite_cdf(model, x)};
          for (const ParametricFit& fit : rep.baselines->candidates)
            row.push_back(parametric_cdf(fit, x));
          table.rows.push_back(std::move(row));
        }
        rep.comparison = std::move(table);
        return strformat("composite_rmse=%.4g over %zu models%s",
                         rep.comparison->models.front().rmse,
                         rep.comparison->models.size(), narrow_note.c_str());
      }))
    return rep;

  rep.status = PipelineStatus::Complete;
  return rep;
}

AnalysisReport run_pipeline(const PipelineConfig& config) {
  AnalysisReport rep;
  try {
    const TimeSeries series = ingest(config.input_path, config.ingest);
    rep = run_pipeline(series, config);
    rep.stages.insert(rep.stages.begin(),
                      {"ingest", true,
                       strformat("%zu samples from %s", series.size(),
                                 config.input_path.c_str())});
    return rep;
  } catch (const std::exception& e) {
    // Either ingest or config validation failed before the first stage ran.
    if (rep.stages.empty()) {
      rep.tool_version = kToolVersion;
      rep.seed = config.seed;
      rep.stages.push_back({"ingest", false, e.what()});
      rep.status = PipelineStatus::Failed;
      try {
        rep.config_hash = config_hash(config);
      } catch (const std::exception&) {
        rep.config_hash = std::string(16, '0');
      }
    }
    return rep;
  }
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(); }

json diagnostics_json(const IidDiagnostics& d) {
  return {{"iid", d.iid},
          {"bound", d.bound},
          {"violation_fraction", d.violation_fraction},
          {"squared_violation_fraction", d.squared_violation_fraction}};
}

json tail_json(const GpdFit& f) {
  return {{"xi", f.params.xi},
          {"xi_reflected", -f.params.xi},
          {"sigma", f.params.sigma},
          {"u", f.params.u},
          {"modified_scale", modified_scale(f.params)},
          {"k", f.k},
          {"zeta", f.zeta},
          {"loglik", num(f.loglik)},
          {"se_xi", num(f.se_xi)},
          {"se_sigma", num(f.se_sigma)},
          {"regular", f.regular},
          {"se_available", f.se_available}};
}

json report_to_json(const AnalysisReport& rep) {
  json j;
  j["tool_version"] = rep.tool_version;
  j["config_hash"] = rep.config_hash;
  j["seed"] = rep.seed;
  j["status"] = pipeline_status_name(rep.status);

  json stages = json::array();
  for (const StageRecord& s : rep.stages)
    stages.push_back({{"name", s.name}, {"ok", s.ok}, {"message", s.message}});
  j["stages"] = stages;

  j["input"] = {{"n", rep.n_input},
                {"interval_ms", rep.interval_ms},
                {"unit", unit_name(rep.unit)}};
  j["working"] = {{"n", rep.n_working}};

  json dep;
  dep["input"] = diagnostics_json(rep.dependency.input);
  dep["mode_used"] = removal_mode_name(rep.dependency.mode_used);
  dep["note"] = rep.dependency.note;
  if (rep.dependency.after) dep["after"] = diagnostics_json(*rep.dependency.after);
  if (rep.dependency.arima) {
    const ArimaFit& a = *rep.dependency.arima;
    dep["arima"] = {{"p", a.model.ar.size()},   {"q", a.model.ma.size()},
                    {"d", a.model.d},           {"c", num(a.model.c)},
                    {"ar", a.model.ar},         {"ma", a.model.ma},
                    {"loglik", num(a.loglik)},  {"aic", num(a.aic)},
                    {"converged", a.converged}};
  }
  if (rep.dependency.garch) {
    const GarchFit& g = *rep.dependency.garch;
    dep["garch"] = {{"k", num(g.model.k)},
                    {"gamma", num(g.model.gamma)},
                    {"phi", num(g.model.phi)},
                    {"psi", num(g.model.psi)},
                    {"loglik", num(g.loglik)},
                    {"converged", g.converged},
                    {"heteroskedastic", g.heteroskedastic}};
  }
  if (rep.dependency.decluster) {
    const DeclusterSelection& d = *rep.dependency.decluster;
    dep["decluster"] = {{"u", d.u}, {"r", d.r}, {"rationale", d.rationale}};
  }
  j["dependency"] = dep;

  if (rep.threshold) {
    const ThresholdSelection& t = *rep.threshold;
    json tj = {{"status", threshold_status_name(t.decision.status)},
               {"method", threshold_method_name(t.decision.method)},
               {"r2_mrl", num(t.decision.r2_mrl)},
               {"r2_xi", num(t.decision.r2_xi)},
               {"r2_sigma_star", num(t.decision.r2_sigma_star)},
               {"rationale", t.decision.rationale},
               {"input_iid", t.input_iid},
               {"warning", t.warning}};
    if (t.decision.u0) tj["u0"] = *t.decision.u0;
    j["threshold"] = tj;
  }

  if (rep.tail) j["tail_fit"] = tail_json(*rep.tail);
  if (rep.upper_tail) j["upper_tail_fit"] = tail_json(*rep.upper_tail);

  if (rep.mssd) {
    const MssdReport& m = *rep.mssd;
    json mj = {{"verdict", m.verdict == MssdVerdict::Feasible ? "feasible" : "infeasible"},
               {"t_star", num(m.t_star)},
               {"alpha", m.alpha},
               {"M", m.M},
               {"K", m.K},
               {"m", m.m},
               {"u0", num(m.u0)},
               {"zeta0", num(m.zeta0)},
               {"n0", m.n0},
               {"n", m.n},
               {"sizes_tested", m.rows.size()},
               {"note", m.note}};
    if (m.j0) mj["j0"] = *m.j0;
    j["mssd"] = mj;
  }

  if (rep.required_additional_samples > 0)
    j["collect"] = {{"required_additional_samples", rep.required_additional_samples}};

  if (rep.pp && rep.qq)
    j["validation"] = {{"pp_max_abs_dev", rep.pp->max_abs_dev},
                       {"pp_rmse", rep.pp->rmse_dev},
                       {"pp_points", rep.pp->points.size()},
                       {"qq_max_abs_dev", rep.qq->max_abs_dev},
                       {"qq_rmse", rep.qq->rmse_dev},
                       {"qq_points", rep.qq->points.size()}};

  if (rep.baselines) {
    json bj = {{"best", family_name(rep.baselines->best.family)},
               {"candidates", rep.baselines->candidates.size()},
               {"failures", rep.baselines->failures}};
    j["baselines"] = bj;
  }

  if (rep.comparison) {
    json models = json::array();
    for (const ComparisonEntry& e : rep.comparison->models) {
      json mj = {{"name", e.name}, {"rmse", num(e.rmse)}};
      if (e.has_params) mj["params"] = {e.params[0], e.params[1]};
      models.push_back(mj);
    }
    j["comparison"] = {{"region_cdf_min", rep.comparison->region.cdf_min},
                       {"region_cdf_max", rep.comparison->region.cdf_max},
                       {"models", models}};
  }
  return j;
}

constexpr const char* kReportSchema = R"({
  "type": "object",
  "required": ["tool_version", "config_hash", "seed", "status", "stages",
               "input", "working", "dependency"],
  "properties": {
    "tool_version": {"type": "string"},
    "config_hash": {"type": "string"},
    "seed": {"type": "integer"},
    "status": {"type": "string", "enum": ["complete", "collect_more_data", "failed"]},
    "stages": {"type": "array", "items": {
      "type": "object", "required": ["name", "ok", "message"],
      "properties": {"name": {"type": "string"}, "ok": {"type": "boolean"},
                     "message": {"type": "string"}}}},
    "input": {"type": "object", "required": ["n", "interval_ms", "unit"],
      "properties": {"n": {"type": "integer"}, "interval_ms": {"type": "number"},
                     "unit": {"type": "string"}}},
    "working": {"type": "object", "required": ["n"],
      "properties": {"n": {"type": "integer"}}},
    "dependency": {"type": "object", "required": ["input", "mode_used", "note"],
      "properties": {
        "input": {"$ref": "diagnostics"},
        "after": {"$ref": "diagnostics"},
        "mode_used": {"type": "string",
                      "enum": ["auto", "declustering", "arima_garch", "none"]},
        "note": {"type": "string"},
        "arima": {"type": "object", "required": ["p", "q", "d", "ar", "ma"],
          "properties": {"p": {"type": "integer"}, "q": {"type": "integer"},
                         "d": {"type": "integer"}, "c": {"type": ["number", "null"]},
                         "ar": {"type": "array", "items": {"type": "number"}},
                         "ma": {"type": "array", "items": {"type": "number"}},
                         "loglik": {"type": ["number", "null"]},
                         "aic": {"type": ["number", "null"]},
                         "converged": {"type": "boolean"}}},
        "garch": {"type": "object", "required": ["k", "gamma", "phi", "psi"],
          "properties": {"k": {"type": ["number", "null"]},
                         "gamma": {"type": ["number", "null"]},
                         "phi": {"type": ["number", "null"]},
                         "psi": {"type": ["number", "null"]},
                         "loglik": {"type": ["number", "null"]},
                         "converged": {"type": "boolean"},
                         "heteroskedastic": {"type": "boolean"}}},
        "decluster": {"type": "object", "required": ["u", "r"],
          "properties": {"u": {"type": "number"}, "r": {"type": "integer"},
                         "rationale": {"type": "string"}}}}},
    "threshold": {"type": "object", "required": ["status", "method", "rationale"],
      "properties": {"status": {"type": "string",
                                "enum": ["decided", "deferred", "infeasible"]},
                     "method": {"type": "string",
                                "enum": ["mean_excess", "stability", "combined", "none"]},
                     "u0": {"type": "number"},
                     "r2_mrl": {"type": ["number", "null"]},
                     "r2_xi": {"type": ["number", "null"]},
                     "r2_sigma_star": {"type": ["number", "null"]},
                     "rationale": {"type": "string"},
                     "input_iid": {"type": "boolean"},
                     "warning": {"type": "string"}}},
    "tail_fit": {"$ref": "tail"},
    "upper_tail_fit": {"$ref": "tail"},
    "mssd": {"type": "object",
      "required": ["verdict", "t_star", "alpha", "M", "K", "m", "n0", "n"],
      "properties": {"verdict": {"type": "string", "enum": ["feasible", "infeasible"]},
                     "j0": {"type": "integer"},
                     "t_star": {"type": ["number", "null"]},
                     "alpha": {"type": "number"},
                     "M": {"type": "integer"}, "K": {"type": "integer"},
                     "m": {"type": "number"},
                     "u0": {"type": ["number", "null"]},
                     "zeta0": {"type": ["number", "null"]},
                     "n0": {"type": "integer"}, "n": {"type": "integer"},
                     "sizes_tested": {"type": "integer"},
                     "note": {"type": "string"}}},
    "collect": {"type": "object", "required": ["required_additional_samples"],
      "properties": {"required_additional_samples": {"type": "integer"}}},
    "validation": {"type": "object",
      "required": ["pp_max_abs_dev", "qq_max_abs_dev"],
      "properties": {"pp_max_abs_dev": {"type": "number"},
                     "pp_rmse": {"type": "number"},
                     "pp_points": {"type": "integer"},
                     "qq_max_abs_dev": {"type": "number"},
                     "qq_rmse": {"type": "number"},
                     "qq_points": {"type": "integer"}}},
    "baselines": {"type": "object", "required": ["best", "candidates"],
      "properties": {"best": {"type": "string"},
                     "candidates": {"type": "integer"},
                     "failures": {"type": "array", "items": {"type": "string"}}}},
    "comparison": {"type": "object",
      "required": ["region_cdf_min", "region_cdf_max", "models"],
      "properties": {"region_cdf_min": {"type": "number"},
                     "region_cdf_max": {"type": "number"},
                     "models": {"type": "array", "items": {
                       "type": "object", "required": ["name", "rmse"],
                       "properties": {"name": {"type": "string"},
                                      "rmse": {"type": ["number", "null"]},
                                      "params": {"type": "array",
                                                 "items": {"type": "number"}}}}}}}
  },
  "definitions": {
    "diagnostics": {"type": "object",
      "required": ["iid", "bound", "violation_fraction", "squared_violation_fraction"],
      "properties": {"iid": {"type": "boolean"}, "bound": {"type": "number"},
                     "violation_fraction": {"type": "number"},
                     "squared_violation_fraction": {"type": "number"}}},
    "tail": {"type": "object",
      "required": ["xi", "xi_reflected", "sigma", "u", "k", "zeta", "regular"],
      "properties": {"xi": {"type": "number"}, "xi_reflected": {"type": "number"},
                     "sigma": {"type": "number"}, "u": {"type": "number"},
                     "modified_scale": {"type": "number"},
                     "k": {"type": "integer"}, "zeta": {"type": "number"},
                     "loglik": {"type": ["number", "null"]},
                     "se_xi": {"type": ["number", "null"]},
                     "se_sigma": {"type": ["number", "null"]},
                     "regular": {"type": "boolean"},
                     "se_available": {"type": "boolean"}}}
  }
})";

bool type_matches(const json& value, const std::string& t) {
  if (t == "object") return value.is_object();
  if (t == "array") return value.is_array();
  if (t == "string") return value.is_string();
  if (t == "boolean") return value.is_boolean();
  if (t == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (t == "number") return value.is_number();
  if (t == "null") return value.is_null();
  throw InvalidArgument(strformat("report schema: unknown type '%s'", t.c_str()));
}

void check_schema(const json& value, const json& schema, const json& root,
                  const std::string& path) {
  if (schema.contains("$ref")) {
    const std::string name = schema["$ref"].get<std::string>();
    check_schema(value, root.at("definitions").at(name), root, path);
    return;
  }
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(value, t.get<std::string>());
    } else {
      for (const json& alt : t)
        if (type_matches(value, alt.get<std::string>())) ok = true;
    }
    if (!ok)
      throw ParseError(strformat("report schema: %s: unexpected type %s",
                                 path.c_str(), value.type_name()));
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const json& alt : schema["enum"])
      if (alt == value) ok = true;
    if (!ok)
      throw ParseError(strformat("report schema: %s: value outside the allowed set",
                                 path.c_str()));
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const json& key : schema["required"])
        if (!value.contains(key.get<std::string>()))
          throw ParseError(strformat("report schema: %s: missing required key '%s'",
                                     path.c_str(), key.get<std::string>().c_str()));
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key)) check_schema(value[key], sub, root, path + "/" + key);
  }
  if (value.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < value.size(); ++i)
      check_schema(value[i], schema["items"], root,
                   strformat("%s/%zu", path.c_str(), i));
}

}  // namespace

const char* report_schema() { return kReportSchema; }

void validate_report_json(const std::string& json_text) {
  json value;
  try {
    value = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(strformat("report: not valid JSON: %s", e.what()));
  }
  const json schema = json::parse(kReportSchema);
  check_schema(value, schema, schema, "");
}

std::string report_json(const AnalysisReport& report) {
  std::string text = report_to_json(report).dump(2);
  text.push_back('\n');
  validate_report_json(text);
  return text;
}

// ---------------------------------------------------------------------------
// CSV renderings

namespace {

void append_num(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void append_quoted(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string scan_csv(const AnalysisReport& report) {
  if (!report.threshold) return "";
  struct Row {
    const MrlPoint* mrl = nullptr;
    const StabilityPoint* stab = nullptr;
  };
  std::map<double, Row> rows;
  for (const MrlPoint& p : report.threshold->mrl.points) rows[p.u].mrl = &p;
  for (const StabilityPoint& p : report.threshold->stability.points)
    rows[p.u].stab = &p;

  std::string out =
      "u,k,mean_excess,se_mean_excess,xi,se_xi,sigma_star,se_sigma_star,regular\n";
  for (const auto& [u, row] : rows) {
    append_num(out, u);
    out.push_back(',');
    const std::size_t k = row.stab ? row.stab->k : (row.mrl ? row.mrl->k : 0);
    out += std::to_string(k);
    out.push_back(',');
    if (row.mrl) {
      append_num(out, row.mrl->mean_excess);
      out.push_back(',');
      append_num(out, row.mrl->se);
    } else {
      out.push_back(',');
    }
    out.push_back(',');
    if (row.stab) {
      append_num(out, row.stab->xi);
      out.push_back(',');
      append_num(out, row.stab->se_xi);
      out.push_back(',');
      append_num(out, row.stab->sigma_star);
      out.push_back(',');
      append_num(out, row.stab->se_sigma_star);
      out.push_back(',');
      out += row.stab->regular ? "1" : "0";
    } else {
      out += ",,,,";
    }
    out.push_back('\n');
  }
  return out;
}

std::string mssd_csv(const AnalysisReport& report) {
  if (!report.mssd) return "";
  std::string out = "j,p_bar,s,lower,gain,missing_cells,excluded,note\n";
  for (const MssdSizeRow& r : report.mssd->rows) {
    out += std::to_string(r.j);
    out.push_back(',');
    append_num(out, r.p_bar);
    out.push_back(',');
    append_num(out, r.s);
    out.push_back(',');
    append_num(out, r.lower);
    out.push_back(',');
    append_num(out, r.gain);
    out.push_back(',');
    out += std::to_string(r.missing_cells);
    out.push_back(',');
    out += r.excluded ? "1" : "0";
    out.push_back(',');
    append_quoted(out, r.note);
    out.push_back('\n');
  }
  return out;
}

std::string ppqq_csv(const AnalysisReport& report) {
  if (!report.pp && !report.qq) return "";
  std::string out = "kind,empirical,modeled\n";
  const auto emit = [&out](const char* kind, const ProbabilityPlotData& plot) {
    for (const auto& [emp, mod] : plot.points) {
      out += kind;
      out.push_back(',');
      append_num(out, emp);
      out.push_back(',');
      append_num(out, mod);
      out.push_back('\n');
    }
  };
  if (report.pp) emit("pp", *report.pp);
  if (report.qq) emit("qq", *report.qq);
  return out;
}

std::string compare_csv(const AnalysisReport& report) {
  if (!report.comparison) return "";
  const ComparisonTable& t = *report.comparison;
  std::string out;
  for (std::size_t i = 0; i < t.column_names.size(); ++i) {
    if (i) out.push_back(',');
    out += t.column_names[i];
  }
  out.push_back('\n');
  for (const std::vector<double>& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      append_num(out, row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

int exit_code(const AnalysisReport& report) {
  switch (report.status) {
    case PipelineStatus::Complete: return 0;
    case PipelineStatus::CollectMoreData: return 2;
    case PipelineStatus::Failed: return 1;
  }
  return 1;
}

}  // namespace evtail
