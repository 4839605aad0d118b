// Command-line front end: one subcommand per analysis surface plus `run`,
// which chains them into the full lower-tail modeling pipeline.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evtail/decluster.hpp"
#include "evtail/error.hpp"
#include "evtail/filter.hpp"
#include "evtail/gpd.hpp"
#include "evtail/io.hpp"
#include "evtail/mssd.hpp"
#include "evtail/pipeline.hpp"
#include "evtail/series.hpp"
#include "evtail/stats.hpp"
#include "evtail/strfmt.hpp"
#include "evtail/synthetic.hpp"
#include "evtail/threshold.hpp"
#include "evtail/validate.hpp"

namespace {

using namespace evtail;

struct InputOpts {
  std::string path;
  std::string format = "auto";
  std::string unit = "dimensionless";
  double interval_ms = 1.0;
};

void add_input_options(CLI::App* sub, InputOpts& o) {
  sub->add_option("-i,--input", o.path, "input CSV file")->required();
  sub->add_option("--format", o.format, "CSV layout")
      ->check(CLI::IsMember({"auto", "single", "time-value"}));
  sub->add_option("--unit", o.unit, "sample unit")
      ->check(CLI::IsMember({"dimensionless", "dbm", "mw"}));
  sub->add_option("--interval-ms", o.interval_ms,
                  "sampling interval for single-column input");
}

TimeSeries load_series(const InputOpts& o) {
  IngestOptions opts;
  if (o.format == "single") opts.format = CsvFormat::SingleColumn;
  if (o.format == "time-value") opts.format = CsvFormat::TimeValue;
  opts.unit = unit_from_name(o.unit);
  opts.interval_ms = o.interval_ms;
  return ingest(o.path, opts);
}

void add_threshold_options(CLI::App* sub, ThresholdConfig& tc) {
  sub->add_option("--points", tc.n_points, "threshold grid size");
  sub->add_option("--k-min", tc.k_min, "minimum exceedances per grid point");
  sub->add_option("--r2-min", tc.r2_min, "linearity acceptance level");
  sub->add_option("--min-prefix", tc.min_prefix, "shortest prefix tested for linearity");
  sub->add_option("--threads", tc.n_threads, "worker threads (0 = hardware)");
}

double resolve_threshold(const TimeSeries& series, const std::string& u_text,
                         const ThresholdConfig& tc) {
  if (u_text == "auto") {
    const ThresholdSelection sel = select_threshold(series, tc);
    if (sel.decision.status != ThresholdStatus::Decided || !sel.decision.u0)
      throw EstimationFailure(
          strformat("no threshold decided: %s", sel.decision.rationale.c_str()));
    std::printf("threshold: u0=%.6g (%s)\n", *sel.decision.u0,
                sel.decision.rationale.c_str());
    return *sel.decision.u0;
  }
  try {
    std::size_t used = 0;
    const double u = std::stod(u_text, &used);
    if (used != u_text.size()) throw std::invalid_argument(u_text);
    return u;
  } catch (const std::exception&) {
    throw ParseError(strformat("--u expects a number or 'auto', got '%s'",
                               u_text.c_str()));
  }
}

nlohmann::json fit_to_json(const GpdFit& f) {
  return {{"xi", f.params.xi},
          {"xi_reflected", -f.params.xi},
          {"sigma", f.params.sigma},
          {"u", f.params.u},
          {"modified_scale", modified_scale(f.params)},
          {"k", f.k},
          {"zeta", f.zeta},
          {"loglik", f.loglik},
          {"se_xi", f.se_xi},
          {"se_sigma", f.se_sigma},
          {"regular", f.regular},
          {"se_available", f.se_available}};
}

void append_cell(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string family;
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::string out = "synthetic.csv";
  double mean = 0.0, sd = 1.0;
  double scale = 1.0, shape = 1.0;
  double nu = 1.0, sigma = 1.0;
  double xi = 0.1, u_star = -2.0, zeta_star = 0.15;
  double body_mean = 0.0, body_sd = 1.0;
  std::vector<double> ar, ma;
  double c = 0.0, g_k = 0.05, g_gamma = 0.85, g_phi = 0.05, g_psi = 0.05;
};

int cmd_simulate(const SimulateOpts& o) {
  SyntheticSpec spec;
  if (o.family == "white_noise") {
    spec = SyntheticSpec::white_noise(o.n, o.seed, o.mean, o.sd);
  } else if (o.family == "exponential") {
    spec = SyntheticSpec::exponential(o.n, o.seed, o.scale);
  } else if (o.family == "weibull") {
    spec = SyntheticSpec::weibull(o.n, o.seed, o.shape, o.scale);
  } else if (o.family == "rician") {
    spec = SyntheticSpec::rician(o.n, o.seed, o.nu, o.sigma);
  } else if (o.family == "rayleigh") {
    spec = SyntheticSpec::rayleigh(o.n, o.seed, o.sigma);
  } else if (o.family == "gpd_tail_splice") {
    spec = SyntheticSpec::gpd_tail_splice(o.n, o.seed, o.xi, o.sigma, o.u_star,
                                          o.zeta_star, o.body_mean, o.body_sd);
  } else if (o.family == "arma_gjr") {
    spec = SyntheticSpec::arma_gjr(o.n, o.seed, o.ar, o.ma, o.c, o.g_k, o.g_gamma,
                                   o.g_phi, o.g_psi);
  } else {
    throw InvalidArgument(strformat("unknown family '%s'", o.family.c_str()));
  }
  const SyntheticData data = generate(spec);
  write_file_atomic(o.out, to_csv(data.series.samples()));
  std::printf("simulate: wrote %zu %s samples to %s\n", data.series.size(),
              o.family.c_str(), o.out.c_str());
  return 0;
}

struct AcfOpts {
  InputOpts input;
  std::size_t max_lag = 50;
  double iid_threshold = 0.05;
  std::string out = "acf.csv";
};

int cmd_acf(const AcfOpts& o) {
  const TimeSeries series = load_series(o.input);
  const AcfResult plain = acf(series, o.max_lag);
  const AcfResult squared = acf_squared(series, o.max_lag);
  const IidDiagnostics diag = is_iid(series, o.max_lag, o.iid_threshold);

  std::string csv = "lag,correlation,squared_correlation,bound\n";
  for (std::size_t lag = 0; lag < plain.correlations.size(); ++lag) {
    csv += std::to_string(lag);
    csv.push_back(',');
    append_cell(csv, plain.correlations[lag]);
    csv.push_back(',');
    append_cell(csv, squared.correlations[lag]);
    csv.push_back(',');
    append_cell(csv, plain.bound);
    csv.push_back('\n');
  }
  write_file_atomic(o.out, csv);
  std::printf("acf: iid=%s violations=%.3g squared=%.3g bound=%.3g -> %s\n",
              diag.iid ? "yes" : "no", diag.violation_fraction,
              diag.squared_violation_fraction, diag.bound, o.out.c_str());
  return 0;
}

struct DeclusterOpts {
  InputOpts input;
  double u = 0.0;
  std::size_t r = 0;
  bool auto_select = false;
  std::size_t u_points = 12;
  std::vector<std::size_t> r_grid = {1, 2, 4, 8, 16, 32};
  double r2_min = 0.95;
  std::string out = "minima.csv";
  std::string scan_out;
  bool u_set = false, r_set = false;
};

int cmd_decluster(const DeclusterOpts& o) {
  const TimeSeries series = load_series(o.input);
  double u = o.u;
  std::size_t r = o.r;
  if (o.auto_select) {
    const std::vector<double> grid = threshold_grid(series, o.u_points);
    const DeclusterSelection sel =
        select_decluster_params(series, grid, o.r_grid, o.r2_min);
    if (!o.scan_out.empty()) {
      std::string csv = "u,r,clusters,fit_ok,xi,se_xi,sigma_star,se_sigma_star,minima_iid\n";
      for (const DeclusterScanCell& cell : sel.scan) {
        append_cell(csv, cell.u);
        csv += strformat(",%zu,%zu,%d,", cell.r, cell.clusters, cell.fit_ok ? 1 : 0);
        append_cell(csv, cell.xi);
        csv.push_back(',');
        append_cell(csv, cell.se_xi);
        csv.push_back(',');
        append_cell(csv, cell.sigma_star);
        csv.push_back(',');
        append_cell(csv, cell.se_sigma_star);
        csv += cell.minima_iid ? ",1\n" : ",0\n";
      }
      write_file_atomic(o.scan_out, csv);
    }
    if (!sel.found)
      throw EstimationFailure(strformat("declustering found no usable (u, r): %s",
                                        sel.rationale.c_str()));
    u = sel.u;
    r = sel.r;
    std::printf("decluster: selected u=%.6g r=%zu (%s)\n", u, r,
                sel.rationale.c_str());
  } else if (!o.u_set || !o.r_set) {
    throw InvalidArgument("decluster: pass --u and --r, or --auto");
  }
  const DeclusterResult res = decluster(series, u, r);
  write_file_atomic(o.out, to_csv(res.minima));
  std::printf("decluster: %zu clusters from %zu samples -> %s\n",
              res.minima.size(), res.n_input, o.out.c_str());
  return 0;
}

struct FilterOpts {
  InputOpts input;
  FilterConfig config;
  std::string out = "residuals.csv";
};

int cmd_filter(const FilterOpts& o) {
  const TimeSeries series = load_series(o.input);
  const FilteredResiduals fr = arima_garch_pipeline(series, o.config);
  write_file_atomic(o.out, to_csv(fr.z.samples()));
  std::printf("filter: arma(%zu,%zu) d=%zu garch(k=%.4g gamma=%.4g phi=%.4g psi=%.4g) "
              "iid=%s -> %s\n",
              fr.arima.model.ar.size(), fr.arima.model.ma.size(), fr.arima.model.d,
              fr.garch.model.k, fr.garch.model.gamma, fr.garch.model.phi,
              fr.garch.model.psi, fr.diagnostics.iid ? "yes" : "no", o.out.c_str());
  return 0;
}

struct ScanOpts {
  InputOpts input;
  ThresholdConfig config;
  std::string out = "scan.csv";
};

int cmd_threshold_scan(const ScanOpts& o) {
  const TimeSeries series = load_series(o.input);
  AnalysisReport wrapper;
  wrapper.threshold = select_threshold(series, o.config);
  write_file_atomic(o.out, scan_csv(wrapper));
  const ThresholdDecision& d = wrapper.threshold->decision;
  if (d.status == ThresholdStatus::Decided && d.u0)
    std::printf("threshold-scan: u0=%.6g r2_xi=%.4g r2_sigma_star=%.4g -> %s\n",
                *d.u0, d.r2_xi, d.r2_sigma_star, o.out.c_str());
  else
    std::printf("threshold-scan: undecided (%s) -> %s\n", d.rationale.c_str(),
                o.out.c_str());
  return 0;
}

struct FitOpts {
  InputOpts input;
  std::string u = "auto";
  ThresholdConfig threshold;
  std::string out = "fit.json";
};

int cmd_fit(const FitOpts& o) {
  const TimeSeries series = load_series(o.input);
  const double u = resolve_threshold(series, o.u, o.threshold);
  const GpdFit fit = fit_gpd(excesses(series.samples(), u), u, series.size());
  std::string text = fit_to_json(fit).dump(2);
  text.push_back('\n');
  write_file_atomic(o.out, text);
  std::printf("fit: xi=%.6g sigma=%.6g k=%zu zeta=%.4g -> %s\n", fit.params.xi,
              fit.params.sigma, fit.k, fit.zeta, o.out.c_str());
  return 0;
}

struct MssdOpts {
  InputOpts input;
  MssdConfig config;
  std::string out = "mssd.csv";
};

int cmd_mssd(const MssdOpts& o) {
  const TimeSeries series = load_series(o.input);
  AnalysisReport wrapper;
  wrapper.mssd = mssd(series, o.config);
  write_file_atomic(o.out, mssd_csv(wrapper));
  const MssdReport& rep = *wrapper.mssd;
  if (rep.verdict == MssdVerdict::Feasible && rep.j0) {
    std::printf("mssd: feasible j0=%zu of n=%zu (u0=%.6g zeta0=%.4g) -> %s\n",
                *rep.j0, rep.n, rep.u0, rep.zeta0, o.out.c_str());
    return 0;
  }
  std::printf("mssd: infeasible: %s -> %s\n", rep.note.c_str(), o.out.c_str());
  return 2;
}

struct ValidateOpts {
  InputOpts input;
  std::string u = "auto";
  ThresholdConfig threshold;
  std::string out = "ppqq.csv";
};

int cmd_validate(const ValidateOpts& o) {
  const TimeSeries series = load_series(o.input);
  const double u = resolve_threshold(series, o.u, o.threshold);
  const std::vector<double> exc = excesses(series.samples(), u);
  const GpdFit fit = fit_gpd(exc, u, series.size());
  AnalysisReport wrapper;
  wrapper.pp = pp_points(fit, exc);
  wrapper.qq = qq_points(fit, series.samples(), u);
  write_file_atomic(o.out, ppqq_csv(wrapper));
  std::printf("validate: pp_max_dev=%.4g pp_rmse=%.4g qq_max_dev=%.4g -> %s\n",
              wrapper.pp->max_abs_dev, wrapper.pp->rmse_dev,
              wrapper.qq->max_abs_dev, o.out.c_str());
  return 0;
}

struct CompareOpts {
  InputOpts input;
  std::string u = "auto";
  ThresholdConfig threshold;
  std::vector<std::string> families = {"weibull", "rician", "lognormal",
                                       "nakagami", "normal"};
  double body_min = 1e-3;
  double region_max = 1e-2;
  std::size_t probes = 400;
  std::string out = "compare.csv";
};

Family family_from_name(const std::string& name) {
  if (name == "weibull") return Family::Weibull;
  if (name == "rician") return Family::Rician;
  if (name == "lognormal") return Family::Lognormal;
  if (name == "nakagami") return Family::Nakagami;
  if (name == "normal") return Family::Normal;
  throw InvalidArgument(strformat("unknown family '%s'", name.c_str()));
}

int cmd_compare(const CompareOpts& o) {
  const TimeSeries series = load_series(o.input);
  const double u0 = resolve_threshold(series, o.u, o.threshold);
  const GpdFit lower = fit_gpd(excesses(series.samples(), u0), u0, series.size());

  std::vector<double> neg(series.samples().size());
  std::transform(series.samples().begin(), series.samples().end(), neg.begin(),
                 [](double v) { return -v; });
  std::vector<double> neg_sorted(neg);
  std::sort(neg_sorted.begin(), neg_sorted.end());
  const double u_neg = empirical_quantile(neg_sorted, lower.zeta);
  const GpdFit upper = fit_gpd(excesses(neg, u_neg), u_neg, neg.size());
  const CompositeCdfModel composite = build_composite(series.samples(), lower, upper);

  std::vector<Family> families;
  for (const std::string& name : o.families) families.push_back(family_from_name(name));
  const std::vector<double> body =
      region_by_empirical_cdf(series.samples(), o.body_min, 1.0);
  const ModelSelection sel = select_best_fit(body, families);

  const CdfRegion region{0.0, o.region_max};
  std::printf("compare: scored on empirical CDF <= %.3g\n", o.region_max);
  std::printf("  composite rmse=%.6g\n",
              rmse_cdf([&](double x) { return composite_cdf(composite, x); },
                       series.samples(), region));
  for (const ParametricFit& fit : sel.candidates)
    std::printf("  %s rmse=%.6g (params %.6g, %.6g)\n", family_name(fit.family),
                rmse_cdf([&](double x) { return parametric_cdf(fit, x); },
                         series.samples(), region),
                fit.params[0], fit.params[1]);
  for (const std::string& note : sel.failures)
    std::printf("  failed: %s\n", note.c_str());

  std::vector<double> sorted(series.samples());
  std::sort(sorted.begin(), sorted.end());
  std::string csv = "x,empirical,composite";
  for (const ParametricFit& fit : sel.candidates) {
    csv.push_back(',');
    csv += family_name(fit.family);
  }
  csv.push_back('\n');
  for (std::size_t i = 0; i < o.probes; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(o.probes);
    const double x = empirical_quantile(sorted, p);
    append_cell(csv, x);
    csv.push_back(',');
    append_cell(csv, p);
    csv.push_back(',');
    append_cell(csv, composite_cdf(composite, x));
    for (const ParametricFit& fit : sel.candidates) {
      csv.push_back(',');
      append_cell(csv, parametric_cdf(fit, x));
    }
    csv.push_back('\n');
  }
  write_file_atomic(o.out, csv);
  std::printf("compare: best baseline %s -> %s\n", family_name(sel.best.family),
              o.out.c_str());
  return 0;
}

struct RunOpts {
  InputOpts input;
  PipelineConfig config;
  std::string mode = "auto";
  std::string out_dir = ".";
};

int cmd_run(const RunOpts& o) {
  PipelineConfig config = o.config;
  config.input_path = o.input.path;
  if (o.input.format == "single") config.ingest.format = CsvFormat::SingleColumn;
  if (o.input.format == "time-value") config.ingest.format = CsvFormat::TimeValue;
  config.ingest.unit = unit_from_name(o.input.unit);
  config.ingest.interval_ms = o.input.interval_ms;
  config.mode = removal_mode_from_name(o.mode);
  config.output_dir = o.out_dir;

  const AnalysisReport report = run_pipeline(config);

  std::filesystem::create_directories(config.output_dir);
  const auto emit = [&](const char* name, const std::string& content) {
    if (content.empty()) return;
    const std::string path =
        (std::filesystem::path(config.output_dir) / name).string();
    write_file_atomic(path, content);
    std::printf("run: wrote %s\n", path.c_str());
  };
  emit("scan.csv", scan_csv(report));
  emit("mssd.csv", mssd_csv(report));
  emit("ppqq.csv", ppqq_csv(report));
  emit("compare.csv", compare_csv(report));
  emit("report.json", report_json(report));

  for (const StageRecord& s : report.stages)
    std::printf("run: [%s] %s %s\n", s.ok ? "ok" : "FAILED", s.name.c_str(),
                s.message.c_str());
  std::printf("run: status=%s\n", pipeline_status_name(report.status));
  return exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower-tail extreme-value modeling of sampled time series"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key-value file");
  int rc = 0;

  SimulateOpts sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic series");
  sim_cmd->add_option("--family", sim.family, "generator family")
      ->required()
      ->check(CLI::IsMember({"white_noise", "exponential", "weibull", "rician",
                             "rayleigh", "gpd_tail_splice", "arma_gjr"}));
  sim_cmd->add_option("-n,--n", sim.n, "sample count");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("-o,--out", sim.out, "output CSV");
  sim_cmd->add_option("--mean", sim.mean);
  sim_cmd->add_option("--sd", sim.sd);
  sim_cmd->add_option("--scale", sim.scale);
  sim_cmd->add_option("--shape", sim.shape);
  sim_cmd->add_option("--nu", sim.nu);
  sim_cmd->add_option("--sigma", sim.sigma);
  sim_cmd->add_option("--xi", sim.xi);
  sim_cmd->add_option("--u-star", sim.u_star);
  sim_cmd->add_option("--zeta-star", sim.zeta_star);
  sim_cmd->add_option("--body-mean", sim.body_mean);
  sim_cmd->add_option("--body-sd", sim.body_sd);
  sim_cmd->add_option("--ar", sim.ar, "AR coefficients")->delimiter(',');
  sim_cmd->add_option("--ma", sim.ma, "MA coefficients")->delimiter(',');
  sim_cmd->add_option("--c", sim.c, "mean-equation intercept");
  sim_cmd->add_option("--g-k", sim.g_k);
  sim_cmd->add_option("--g-gamma", sim.g_gamma);
  sim_cmd->add_option("--g-phi", sim.g_phi);
  sim_cmd->add_option("--g-psi", sim.g_psi);
  sim_cmd->callback([&] { rc = cmd_simulate(sim); });

  AcfOpts acf_opts;
  CLI::App* acf_cmd = app.add_subcommand("acf", "autocorrelation diagnostics");
  add_input_options(acf_cmd, acf_opts.input);
  acf_cmd->add_option("--max-lag", acf_opts.max_lag);
  acf_cmd->add_option("--iid-threshold", acf_opts.iid_threshold);
  acf_cmd->add_option("-o,--out", acf_opts.out);
  acf_cmd->callback([&] { rc = cmd_acf(acf_opts); });

  DeclusterOpts dec;
  CLI::App* dec_cmd = app.add_subcommand("decluster", "cluster minima extraction");
  add_input_options(dec_cmd, dec.input);
  CLI::Option* dec_u = dec_cmd->add_option("--u", dec.u, "threshold");
  CLI::Option* dec_r = dec_cmd->add_option("--r", dec.r, "separation run length");
  dec_cmd->add_flag("--auto", dec.auto_select, "select u and r from the data");
  dec_cmd->add_option("--u-points", dec.u_points);
  dec_cmd->add_option("--r-grid", dec.r_grid)->delimiter(',');
  dec_cmd->add_option("--r2-min", dec.r2_min);
  dec_cmd->add_option("-o,--out", dec.out);
  dec_cmd->add_option("--scan-out", dec.scan_out, "write the (u, r) scan table");
  dec_cmd->callback([&] {
    dec.u_set = dec_u->count() > 0;
    dec.r_set = dec_r->count() > 0;
    rc = cmd_decluster(dec);
  });

  FilterOpts fil;
  CLI::App* fil_cmd = app.add_subcommand("filter", "mean/variance filtering to residuals");
  add_input_options(fil_cmd, fil.input);
  fil_cmd->add_option("--p", fil.config.p, "AR order (-1 = search)");
  fil_cmd->add_option("--q", fil.config.q, "MA order (-1 = search)");
  fil_cmd->add_option("--d", fil.config.d, "differencing order");
  fil_cmd->add_option("--max-order", fil.config.max_order);
  fil_cmd->add_option("-o,--out", fil.out);
  fil_cmd->callback([&] { rc = cmd_filter(fil); });

  ScanOpts scan;
  CLI::App* scan_cmd = app.add_subcommand("threshold-scan", "stability and mean-excess curves");
  add_input_options(scan_cmd, scan.input);
  add_threshold_options(scan_cmd, scan.config);
  scan_cmd->add_option("-o,--out", scan.out);
  scan_cmd->callback([&] { rc = cmd_threshold_scan(scan); });

  FitOpts fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "tail fit at a threshold");
  add_input_options(fit_cmd, fit.input);
  fit_cmd->add_option("--u", fit.u, "threshold value or 'auto'");
  add_threshold_options(fit_cmd, fit.threshold);
  fit_cmd->add_option("-o,--out", fit.out);
  fit_cmd->callback([&] { rc = cmd_fit(fit); });

  MssdOpts ms;
  CLI::App* ms_cmd = app.add_subcommand("mssd", "minimum sample size determination");
  add_input_options(ms_cmd, ms.input);
  ms_cmd->add_option("--alpha", ms.config.alpha);
  ms_cmd->add_option("--sets", ms.config.M, "first-step bootstrap sets");
  ms_cmd->add_option("--resamples", ms.config.K, "second-step resamples per set");
  ms_cmd->add_option("--n0", ms.config.n0, "start size (0 = derive)");
  ms_cmd->add_option("--stride", ms.config.grid_stride);
  ms_cmd->add_option("--grid-points", ms.config.grid_points);
  ms_cmd->add_option("--return-period", ms.config.m);
  ms_cmd->add_option("--confidence", ms.config.confidence);
  ms_cmd->add_option("--seed", ms.config.seed);
  add_threshold_options(ms_cmd, ms.config.threshold);
  ms_cmd->add_option("-o,--out", ms.out);
  ms_cmd->callback([&] {
    ms.config.n_threads = ms.config.threshold.n_threads;
    rc = cmd_mssd(ms);
  });

  ValidateOpts val;
  CLI::App* val_cmd = app.add_subcommand("validate", "probability and quantile plots");
  add_input_options(val_cmd, val.input);
  val_cmd->add_option("--u", val.u, "threshold value or 'auto'");
  add_threshold_options(val_cmd, val.threshold);
  val_cmd->add_option("-o,--out", val.out);
  val_cmd->callback([&] { rc = cmd_validate(val); });

  CompareOpts cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "composite vs parametric baselines");
  add_input_options(cmp_cmd, cmp.input);
  cmp_cmd->add_option("--u", cmp.u, "threshold value or 'auto'");
  add_threshold_options(cmp_cmd, cmp.threshold);
  cmp_cmd->add_option("--families", cmp.families)->delimiter(',');
  cmp_cmd->add_option("--body-min", cmp.body_min, "baseline fit region lower CDF");
  cmp_cmd->add_option("--region-max", cmp.region_max, "scored region upper CDF");
  cmp_cmd->add_option("--probes", cmp.probes);
  cmp_cmd->add_option("-o,--out", cmp.out);
  cmp_cmd->callback([&] { rc = cmd_compare(cmp); });

  RunOpts run;
  CLI::App* run_cmd = app.add_subcommand("run", "full analysis pipeline");
  add_input_options(run_cmd, run.input);
  run_cmd->add_option("--mode", run.mode, "dependency removal method")
      ->check(CLI::IsMember({"auto", "declustering", "arima_garch", "none"}));
  run_cmd->add_option("--seed", run.config.seed);
  run_cmd->add_option("--out-dir", run.out_dir);
  add_threshold_options(run_cmd, run.config.threshold);
  run_cmd->add_option("--alpha", run.config.mssd.alpha);
  run_cmd->add_option("--sets", run.config.mssd.M);
  run_cmd->add_option("--resamples", run.config.mssd.K);
  run_cmd->add_option("--n0", run.config.mssd.n0);
  run_cmd->add_option("--stride", run.config.mssd.grid_stride);
  run_cmd->add_option("--grid-points", run.config.mssd.grid_points);
  run_cmd->add_option("--return-period", run.config.mssd.m);
  run_cmd->add_option("--confidence", run.config.mssd.confidence);
  run_cmd->add_option("--p", run.config.filter.p);
  run_cmd->add_option("--q", run.config.filter.q);
  run_cmd->add_option("--d", run.config.filter.d);
  run_cmd->add_option("--body-min", run.config.baseline_cdf_min);
  run_cmd->add_option("--region-max", run.config.comparison.cdf_max);
  run_cmd->add_option("--probes", run.config.probe_points);
  run_cmd->callback([&] {
    run.config.mssd.n_threads = run.config.threshold.n_threads;
    rc = cmd_run(run);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
