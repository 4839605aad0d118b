#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtail/series.hpp"

namespace evtail {

struct ClusterSpan {
  std::size_t first = 0;  // first below-threshold index of the cluster
  std::size_t last = 0;   // last below-threshold index
};

struct DeclusterResult {
  double u = 0.0;
  std::size_t r = 0;
  std::vector<double> minima;  // one per cluster, input order
  std::vector<ClusterSpan> spans;
  std::size_t n_input = 0;
};

// Groups below-threshold samples into clusters.  A run of consecutive
// at-or-above-threshold samples longer than r separates clusters; runs of
// length <= r are absorbed into the surrounding cluster.
DeclusterResult decluster(std::span<const double> samples, double u, std::size_t r);
DeclusterResult decluster(const TimeSeries& series, double u, std::size_t r);

struct DeclusterScanCell {
  double u = 0.0;
  std::size_t r = 0;
  std::size_t clusters = 0;
  bool fit_ok = false;
  double xi = 0.0;
  double se_xi = 0.0;
  double sigma_star = 0.0;
  double se_sigma_star = 0.0;
  bool minima_iid = false;
  std::string note;
};

struct DeclusterConfig {
  std::size_t k_min = 30;       // clusters needed before a cell is fitted
  double param_rel_tol = 0.05;  // settling margin between consecutive r values
  std::size_t iid_max_lag = 20;
  double iid_threshold = 0.05;
  unsigned n_threads = 0;
};

struct DeclusterSelection {
  bool found = false;
  double u = 0.0;
  std::size_t r = 0;
  std::vector<DeclusterScanCell> scan;  // full (u, r) table for inspection
  std::string rationale;
};

// Scans the (u, r) grid, fitting the tail of the cluster minima per cell, and
// picks the smallest r whose minima look independent and whose estimates have
// settled in r, paired with the deepest threshold below which both the shape
// and the adjusted scale are linear in u (the threshold-stability rule).
DeclusterSelection select_decluster_params(const TimeSeries& series,
                                           std::span<const double> u_grid,
                                           std::span<const std::size_t> r_grid,
                                           double r2_min = 0.95,
                                           const DeclusterConfig& config = {});

}  // namespace evtail
