#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "alchemloop/cli/cli.hpp"
#include "alchemloop/metrics/report.hpp"
#include "alchemloop/oracle/oracle.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitOracle = 2;
constexpr int kExitInternal = 3;

alchemloop::cli::CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw alchemloop::cli::ConfigError("cannot open config file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw alchemloop::cli::ConfigError(path + ": " + e.what());
  }
  return alchemloop::cli::CampaignConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alchemloop: closed-loop molecular generation with a synthetic oracle"};
  app.require_subcommand(1);

  // seed
  auto* seed_cmd = app.add_subcommand("seed", "generate a seed dataset (SMILES lines)");
  alchemloop::cli::SeedSpec seed_spec;
  std::uint64_t seed_value = 1;
  std::string seed_out = "seeds.smi";
  seed_cmd->add_option("--count", seed_spec.count, "number of molecules");
  seed_cmd->add_option("--seed", seed_value, "random seed");
  seed_cmd->add_option("--out", seed_out, "output file");
  seed_cmd->add_option("--min-tokens", seed_spec.min_tokens, "minimum genotype length");
  seed_cmd->add_option("--max-tokens", seed_spec.max_tokens, "maximum genotype length");
  bool no_constraint = false;
  seed_cmd->add_flag("--no-require-no-bond", no_constraint,
                     "drop the nitrogen-oxygen bond constraint");

  // run
  auto* run_cmd = app.add_subcommand("run", "execute a campaign from a config file");
  std::string config_path;
  std::string out_override;
  std::string ablation;
  std::string oracle_override;
  std::uint64_t seed_override = 0;
  bool seed_overridden = false;
  run_cmd->add_option("--config", config_path, "campaign config (JSON)")->required();
  run_cmd->add_option("--out", out_override, "output directory override");
  run_cmd->add_option("--seed", seed_override, "master seed override")
      ->each([&](const std::string&) { seed_overridden = true; });
  run_cmd->add_option("--ablation", ablation, "no-retrain | no-stability-gate");
  run_cmd->add_option("--oracle", oracle_override, "synthetic | external:<command>");

  // report
  auto* report_cmd = app.add_subcommand("report", "regenerate report files from a run log");
  std::string run_dir;
  report_cmd->add_option("--run", run_dir, "run directory")->required();

  // eval-oracle
  auto* eval_cmd = app.add_subcommand(
      "eval-oracle", "evaluate molecules with the synthetic oracle; with no --smiles, serves "
                     "the JSON-lines protocol on stdin/stdout");
  std::string eval_smiles;
  eval_cmd->add_option("--smiles", eval_smiles, "single molecule to evaluate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed_cmd) {
      seed_spec.require_no_bond = !no_constraint;
      if (seed_spec.count < 1) throw alchemloop::cli::ConfigError("--count must be >= 1");
      alchemloop::cli::cmd_seed(seed_spec, seed_value, seed_out);
      return 0;
    }
    if (*run_cmd) {
      alchemloop::cli::CampaignConfig config = load_config(config_path);
      if (!out_override.empty()) config.output_dir = out_override;
      if (seed_overridden) config.master_seed = seed_override;
      if (!ablation.empty()) {
        if (ablation == "no-retrain") {
          for (auto& p : config.plans) p.retrain_after = false;
        } else if (ablation == "no-stability-gate") {
          for (auto& p : config.plans) p.use_stability_gate = false;
        } else {
          throw alchemloop::cli::ConfigError("unknown --ablation: " + ablation);
        }
      }
      if (!oracle_override.empty()) {
        if (oracle_override == "synthetic") {
          config.oracle = {"synthetic", "", config.oracle.timeout_ms};
        } else if (oracle_override.rfind("external:", 0) == 0) {
          config.oracle = {"external", oracle_override.substr(9), config.oracle.timeout_ms};
        } else {
          throw alchemloop::cli::ConfigError("unknown --oracle: " + oracle_override);
        }
      }
      alchemloop::cli::cmd_run(config);
      return 0;
    }
    if (*report_cmd) {
      alchemloop::cli::cmd_report(run_dir);
      return 0;
    }
    if (*eval_cmd) {
      if (!eval_smiles.empty()) {
        std::cout << alchemloop::cli::eval_one(eval_smiles).dump() << '\n';
        return 0;
      }
      return alchemloop::cli::serve_oracle(std::cin, std::cout) == 0 ? 0 : kExitInternal;
    }
  } catch (const alchemloop::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const alchemloop::cli::ReportError& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const alchemloop::metrics::IncompleteState& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const alchemloop::oracle::OracleFailure& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
