#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evtail/decluster.hpp"
#include "evtail/filter.hpp"
#include "evtail/gpd.hpp"
#include "evtail/io.hpp"
#include "evtail/mssd.hpp"
#include "evtail/series.hpp"
#include "evtail/threshold.hpp"
#include "evtail/validate.hpp"

namespace evtail {

enum class RemovalMode { Auto, Declustering, ArimaGarch, None };

const char* removal_mode_name(RemovalMode mode);
RemovalMode removal_mode_from_name(const std::string& name);

// One seed drives every random draw in the run; the seed fields of nested
// configs are overwritten with it.
struct PipelineConfig {
  std::string input_path;
  IngestOptions ingest;
  RemovalMode mode = RemovalMode::Auto;
  ThresholdConfig threshold;
  MssdConfig mssd;
  FilterConfig filter;
  std::size_t decluster_u_points = 12;
  std::vector<std::size_t> decluster_r = {1, 2, 4, 8, 16, 32};
  // Baseline families are fitted on the body region and extrapolated into the
  // comparison region; non-positive working data narrows the list to normal.
  std::vector<Family> baselines = {Family::Weibull, Family::Rician,
                                   Family::Lognormal, Family::Nakagami,
                                   Family::Normal};
  double baseline_cdf_min = 1e-3;   // body region: empirical CDF in [this, 1]
  CdfRegion comparison;             // scored region; default is the lower tail
  std::size_t probe_points = 400;   // rows of the plotted CDF table
  std::string output_dir = ".";
  std::uint64_t seed = 1;
};

void validate(const PipelineConfig& config);

struct StageRecord {
  std::string name;
  bool ok = true;
  std::string message;
};

enum class PipelineStatus { Complete, CollectMoreData, Failed };

const char* pipeline_status_name(PipelineStatus status);

struct DependencySummary {
  IidDiagnostics input;
  RemovalMode mode_used = RemovalMode::None;
  std::optional<IidDiagnostics> after;   // diagnostics of the working series
  std::optional<ArimaFit> arima;
  std::optional<GarchFit> garch;
  std::optional<DeclusterSelection> decluster;
  std::string note;
};

struct ComparisonEntry {
  std::string name;
  bool has_params = false;
  std::array<double, 2> params{0.0, 0.0};
  double rmse = 0.0;  // against the empirical CDF inside the scored region
};

struct ComparisonTable {
  CdfRegion region;
  std::vector<ComparisonEntry> models;     // composite first, then baselines
  std::vector<std::string> column_names;   // x, empirical, then model names
  std::vector<std::vector<double>> rows;   // quantile-spaced CDF probes
};

struct AnalysisReport {
  PipelineStatus status = PipelineStatus::Failed;
  std::vector<StageRecord> stages;
  std::string tool_version;
  std::string config_hash;  // 16 hex digits over the canonical config dump
  std::uint64_t seed = 0;

  std::size_t n_input = 0;
  double interval_ms = 1.0;
  Unit unit = Unit::Dimensionless;
  std::size_t n_working = 0;

  DependencySummary dependency;
  std::optional<ThresholdSelection> threshold;
  std::optional<GpdFit> tail;
  std::optional<MssdReport> mssd;
  // Nonzero when the verdict is to collect more data before trusting the fit.
  std::size_t required_additional_samples = 0;
  std::optional<ProbabilityPlotData> pp;
  std::optional<ProbabilityPlotData> qq;
  std::optional<GpdFit> upper_tail;  // fitted on the negated working series
  std::optional<CompositeCdfModel> composite;
  std::optional<ModelSelection> baselines;
  std::optional<ComparisonTable> comparison;
};

// Dependency check -> removal -> threshold -> tail fit -> sample-size verdict
// -> validation -> composite -> baseline comparison.  A stage failure tags the
// report and stops; everything produced so far stays in it.
AnalysisReport run_pipeline(const TimeSeries& series, const PipelineConfig& config);

// Ingests config.input_path first; the ingest failure becomes stage one.
AnalysisReport run_pipeline(const PipelineConfig& config);

// Canonical 64-bit FNV-1a hash of the config, as fixed-width hex.
std::string config_hash(const PipelineConfig& config);

// Schema-validated JSON serialization of the report (throws EstimationFailure
// if the rendered document ever fails its own schema).
std::string report_json(const AnalysisReport& report);

// The machine-readable contract report_json is checked against.
const char* report_schema();
void validate_report_json(const std::string& json_text);

// CSV renderings of the per-stage tables; empty string when the stage is absent.
std::string scan_csv(const AnalysisReport& report);
std::string mssd_csv(const AnalysisReport& report);
std::string ppqq_csv(const AnalysisReport& report);
std::string compare_csv(const AnalysisReport& report);

// 0 complete, 2 collect-more-data, 1 failed.
int exit_code(const AnalysisReport& report);

}  // namespace evtail
