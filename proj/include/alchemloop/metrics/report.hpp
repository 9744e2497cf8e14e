#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "alchemloop/loop/run_state.hpp"
#include "alchemloop/metrics/metrics.hpp"

namespace alchemloop::metrics {

struct IncompleteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One row of the summary table, per generation source (the seed dataset,
// each iteration, and all generated molecules pooled). "% top" and "% SOTA"
// count stable molecules in the numerator over all labeled molecules of
// the source; the SOTA reference front comes from the stable seed points.
struct SourceRow {
  std::string source;
  std::size_t labeled = 0;
  double valid = 1.0;
  double top_rho = 0.0;       // NaN when no stable molecule
  double top_hof = 0.0;
  double top_score = 0.0;     // best multi-property score (oracle values)
  double pct_stable = 0.0;
  double pct_top = 0.0;
  double pct_sota = 0.0;
};

struct DistanceErrorPair {
  std::string smiles;
  int iteration = 0;
  double distance = 0.0;   // nearest seed molecule in feature space
  double rho_error = 0.0;  // |initial-model prediction - oracle value|
  double hof_error = 0.0;
};

struct BinnedError {
  double bin_low = 0.0;
  double bin_high = 0.0;
  std::size_t count = 0;        // molecules predicted into this bin
  double mean_abs_error = 0.0;  // against oracle values
  std::size_t seed_count = 0;   // seed molecules whose true value lands here
};

struct CampaignReport {
  bool complete = false;
  std::vector<SourceRow> table;
  std::vector<loop::MetricSnapshot> iterations;
  std::vector<DistanceErrorPair> distance_error;  // generated stable molecules
  std::vector<BinnedError> density_bins;          // 0.10 g/cc bins
  std::vector<BinnedError> hof_bins;              // 100 kcal/mol bins

  nlohmann::json to_json() const;
  // CSV tables keyed by file stem ("table1", "iterations", "distance_error",
  // "density_bins", "hof_bins", "features")
  std::map<std::string, std::string> to_csv_tables() const;
};

// Derives every report quantity from the run state (which cmd_report
// reconstructs from the log, so reports never depend on in-memory state).
// Requires at least one completed iteration.
CampaignReport campaign_report(const loop::RunState& state);

// Normalized feature matrix for all labeled molecules (external embedding
// tools consume this).
std::string feature_matrix_csv(const loop::RunState& state);

}  // namespace alchemloop::metrics
