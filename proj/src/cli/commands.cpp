#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "alchemloop/cli/cli.hpp"
#include "alchemloop/metrics/report.hpp"
#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/oracle/external.hpp"

namespace alchemloop::cli {

namespace fs = std::filesystem;

namespace {

// exclusive lock file, removed on scope exit
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw std::runtime_error("run directory is locked by another process: " + path_.string());
    }
    ::close(fd);
  }
  ~RunLock() { std::error_code ec; fs::remove(path_, ec); }

 private:
  fs::path path_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::unique_ptr<oracle::Oracle> make_oracle(const OracleSpec& spec) {
  if (spec.kind == "synthetic") return std::make_unique<oracle::SyntheticOracle>();
  return std::make_unique<oracle::ExternalOracle>(spec.command, spec.timeout_ms);
}

void write_report_files(const fs::path& dir, const loop::RunState& state) {
  const metrics::CampaignReport report = metrics::campaign_report(state);
  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  for (const auto& [stem, csv] : report.to_csv_tables()) {
    write_file(dir / ("report_" + stem + ".csv"), csv);
  }
  write_file(dir / "features.csv", metrics::feature_matrix_csv(state));
}

}  // namespace

void cmd_run(const CampaignConfig& config) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  RunLock lock(dir);

  using Clock = std::chrono::steady_clock;
  std::ostringstream timings;
  const auto t0 = Clock::now();

  write_file(dir / "config.json", config.to_json().dump(2) + "\n");

  // resolve the seed dataset; duplicates by canonical form collapse so the
  // labeled archive replays exactly from the log
  std::vector<molgraph::Molecule> seeds;
  if (config.seed_path) {
    seeds = load_smiles_file(*config.seed_path);
  } else {
    for (const std::string& s : generate_seed_smiles(config.seed_spec, config.master_seed)) {
      seeds.push_back(molgraph::parse_smiles(s));
    }
  }
  {
    std::set<std::string> seen;
    std::vector<molgraph::Molecule> unique;
    std::string lines;
    for (molgraph::Molecule& m : seeds) {
      std::string smiles = molgraph::write_smiles(m);
      if (!seen.insert(smiles).second) continue;
      lines += smiles;
      lines += '\n';
      unique.push_back(std::move(m));
    }
    seeds = std::move(unique);
    write_file(dir / "seeds.smi", lines);
  }
  const auto t1 = Clock::now();
  timings << "seed_phase_ms "
          << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() << "\n";

  std::unique_ptr<oracle::Oracle> oracle = make_oracle(config.oracle);

  std::ofstream log(dir / "run.log.jsonl");
  if (!log) throw std::runtime_error("cannot write run log");
  const loop::EventSink sink = [&](const nlohmann::json& e) { log << e.dump() << '\n'; };
  const loop::CheckpointSink checkpoint = [&](const loop::RunState& s) {
    write_file(dir / ("checkpoint_iter" + std::to_string(s.iterations_completed) + ".json"),
               s.to_json().dump() + "\n");
  };
  loop::run_campaign(seeds, config.plans, config.settings, config.master_seed, *oracle, sink,
                     checkpoint);
  log.close();
  const auto t2 = Clock::now();
  timings << "campaign_ms "
          << std::chrono::duration_cast<std::chrono::milliseconds>(t2 - t1).count() << "\n";

  // the report comes from the log, never from the in-memory state
  write_report_files(dir, state_from_log(dir / "run.log.jsonl"));
  const auto t3 = Clock::now();
  timings << "report_ms "
          << std::chrono::duration_cast<std::chrono::milliseconds>(t3 - t2).count() << "\n";
  write_file(dir / "timings.txt", timings.str());
}

loop::RunState state_from_log(const fs::path& log_path) {
  std::ifstream in(log_path);
  if (!in) throw ReportError("cannot open run log: " + log_path.string());
  loop::RunState state;
  std::vector<std::string> seed_smiles;
  bool saw_run_end = false;
  std::size_t feature_dim = molgraph::kDefaultFeatureDim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw ReportError(log_path.string() + ":" + std::to_string(lineno) +
                        ": malformed log line: " + err.what());
    }
    try {
      const std::string event = e.at("event").get<std::string>();
      if (event == "run_start") {
        state.master_seed = e.at("master_seed").get<std::uint64_t>();
        feature_dim = e.value("feature_dim", feature_dim);
      } else if (event == "molecule_labeled") {
        loop::LabeledMolecule lm = loop::LabeledMolecule::from_json(e.at("data"));
        if (lm.iteration == 0) seed_smiles.push_back(lm.smiles);
        state.append(std::move(lm));
      } else if (event == "seed_stats") {
        state.property_stats.mean_rho = e.at("mean_rho").get<double>();
        state.property_stats.std_rho = e.at("std_rho").get<double>();
        state.property_stats.mean_hof = e.at("mean_hof").get<double>();
        state.property_stats.std_hof = e.at("std_hof").get<double>();
      } else if (event == "iteration_end") {
        state.snapshots.push_back(loop::MetricSnapshot::from_json(e.at("snapshot")));
        state.iterations_completed = e.at("iteration").get<int>();
      } else if (event == "run_end") {
        saw_run_end = true;
      }
    } catch (const nlohmann::json::exception& err) {
      throw ReportError(log_path.string() + ":" + std::to_string(lineno) +
                        ": unexpected log event shape: " + err.what());
    }
  }
  if (seed_smiles.empty()) {
    throw ReportError(log_path.string() + ": log contains no labeled seed molecules");
  }
  if (!saw_run_end) {
    // checkpoint-only / interrupted run: the replay still works, the report
    // is flagged incomplete by the caller
    state.iterations_completed = std::max(state.iterations_completed, 0);
  }
  // feature normalization replays exactly: same molecules, same order
  std::vector<molgraph::Molecule> seed_molecules;
  seed_molecules.reserve(seed_smiles.size());
  for (const std::string& s : seed_smiles) seed_molecules.push_back(molgraph::parse_smiles(s));
  state.feature_stats = molgraph::compute_norm_stats(seed_molecules, feature_dim);
  return state;
}

void cmd_report(const fs::path& run_dir) {
  const fs::path log_path = run_dir / "run.log.jsonl";
  loop::RunState state = state_from_log(log_path);

  // detect an interrupted run to flag the report
  bool complete = false;
  {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find("\"event\":\"run_end\"") != std::string::npos) complete = true;
    }
  }
  if (state.iterations_completed < 1) {
    throw metrics::IncompleteState("run has no completed iterations; nothing to report");
  }
  metrics::CampaignReport report = metrics::campaign_report(state);
  report.complete = complete;
  write_file(run_dir / "report.json", report.to_json().dump(2) + "\n");
  for (const auto& [stem, csv] : report.to_csv_tables()) {
    write_file(run_dir / ("report_" + stem + ".csv"), csv);
  }
  write_file(run_dir / "features.csv", metrics::feature_matrix_csv(state));
}

nlohmann::json eval_one(const std::string& smiles) {
  const oracle::OracleResult r = oracle::synthetic_evaluate(molgraph::parse_smiles(smiles));
  nlohmann::json j{{"smiles", smiles},
                   {"stable", r.stable},
                   {"reason", oracle::failure_reason_name(r.reason)}};
  j["density"] = r.stable ? nlohmann::json(r.density) : nullptr;
  j["hof"] = r.stable ? nlohmann::json(r.solid_hof) : nullptr;
  return j;
}

int serve_oracle(std::istream& in, std::ostream& out) {
  oracle::SyntheticOracle oc;
  int errors = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json response;
    try {
      const nlohmann::json request = nlohmann::json::parse(line);
      const oracle::OracleResult r =
          oc.evaluate(molgraph::parse_smiles(request.at("smiles").get<std::string>()));
      response["id"] = request.at("id");
      response["stable"] = r.stable;
      response["density"] = r.stable ? nlohmann::json(r.density) : nullptr;
      response["hof"] = r.stable ? nlohmann::json(r.solid_hof) : nullptr;
      response["reason"] = oracle::failure_reason_name(r.reason);
    } catch (const std::exception& e) {
      response = {{"error", e.what()}};
      ++errors;
    }
    out << response.dump() << '\n';
    out.flush();
  }
  return errors;
}

}  // namespace alchemloop::cli
