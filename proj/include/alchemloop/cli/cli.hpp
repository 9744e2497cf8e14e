#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alchemloop/loop/campaign.hpp"

namespace alchemloop::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeedSpec {
  std::size_t count = 2000;
  bool require_no_bond = true;  // every molecule carries at least one N-O bond
  std::size_t min_tokens = 12;
  std::size_t max_tokens = 36;
};

struct OracleSpec {
  std::string kind = "synthetic";  // "synthetic" | "external"
  std::string command;             // for kind == "external"
  int timeout_ms = 30000;
};

// The full campaign configuration. Parsing is strict: unknown keys anywhere
// are rejected; missing keys fall back to the documented defaults.
struct CampaignConfig {
  std::uint64_t master_seed = 1;
  std::string output_dir = "run";
  std::optional<std::string> seed_path;  // SMILES-lines file; otherwise generated
  SeedSpec seed_spec;
  OracleSpec oracle;
  loop::CampaignSettings settings;
  std::vector<loop::IterationPlan> plans;

  static CampaignConfig defaults();
  static CampaignConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Rejection-sampled seed molecules: distinct canonical SMILES, valence
// valid, net-neutral, CHON, free of the synthetic oracle's instability
// motifs, and (optionally) containing at least one nitrogen-oxygen bond.
std::vector<std::string> generate_seed_smiles(const SeedSpec& spec, std::uint64_t seed);

std::vector<molgraph::Molecule> load_smiles_file(const std::filesystem::path& path);

// seed: writes the seed dataset file (one canonical SMILES per line).
void cmd_seed(const SeedSpec& spec, std::uint64_t seed, const std::filesystem::path& out);

// run: executes the campaign into config.output_dir (log, checkpoints,
// report files, timing sidecar). Holds a lock file for the duration.
void cmd_run(const CampaignConfig& config);

// report: regenerates every report file from the run log alone.
void cmd_report(const std::filesystem::path& run_dir);

// eval-oracle line protocol server (stdin -> stdout), also the debugging
// single-molecule path. Returns the number of protocol errors encountered.
int serve_oracle(std::istream& in, std::ostream& out);
nlohmann::json eval_one(const std::string& smiles);

// Reconstructs a RunState from a run log (the replay path behind
// cmd_report, exposed for tests). Throws ReportError naming the offending
// line on corrupt input.
loop::RunState state_from_log(const std::filesystem::path& log_path);

}  // namespace alchemloop::cli
