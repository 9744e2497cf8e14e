#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alchemloop/molgraph/descriptors.hpp"
#include "alchemloop/oracle/oracle.hpp"
#include "alchemloop/scoring/scoring.hpp"
#include "alchemloop/surrogate/surrogate.hpp"

namespace alchemloop::loop {

enum class SelectionPolicy { Random, TopK };

const char* selection_policy_name(SelectionPolicy p);
SelectionPolicy selection_policy_from_name(const std::string& name);

struct IterationPlan {
  int index = 1;  // 1-based
  int oracle_budget = 0;
  SelectionPolicy policy = SelectionPolicy::Random;
  bool use_stability_gate = false;
  bool retrain_after = true;
};

struct LabeledMolecule {
  std::string smiles;  // canonical
  oracle::OracleResult result;
  int iteration = 0;  // 0 = seed dataset
  std::string policy;
  bool holdout = false;  // reserved for evaluation, excluded from training
  // surrogate predictions recorded at labeling time (null for seeds):
  // the models guiding the iteration, and the initial seed-trained models
  std::optional<double> pred_rho, pred_hof;
  std::optional<double> pred_rho0, pred_hof0;
  std::optional<double> pred_stable;

  nlohmann::json to_json() const;
  static LabeledMolecule from_json(const nlohmann::json& j);
};

struct MetricSnapshot {
  int iteration = 0;
  std::size_t generated = 0;   // distinct molecules out of the GA
  std::size_t novel = 0;       // not previously labeled
  std::size_t selected = 0;
  std::size_t labeled_stable = 0;
  std::size_t labeled_unstable = 0;
  // current-model evaluation on the cumulative generated holdout
  std::size_t holdout_regression_n = 0;
  double rho_rmse = 0.0;
  double hof_rmse = 0.0;
  double top_precision = 0.0;
  double top_recall = 0.0;
  std::size_t holdout_true_top = 0;
  double stability_auc = 0.0;  // NaN when undefined

  nlohmann::json to_json() const;
  static MetricSnapshot from_json(const nlohmann::json& j);
};

struct RunState {
  std::uint64_t master_seed = 0;
  molgraph::NormStats feature_stats;
  scoring::PropertyStats property_stats;

  std::vector<LabeledMolecule> archive;  // keyed by canonical SMILES
  std::map<std::string, std::size_t> archive_index;

  std::optional<surrogate::SurrogateModel> rho_model, hof_model, stability_model;
  std::optional<surrogate::SurrogateModel> rho_model0, hof_model0;  // initial models

  // trained models per completed retrain, for post-hoc analysis; kept in
  // memory only (not checkpointed)
  struct ModelGeneration {
    int iteration = 0;
    surrogate::SurrogateModel rho, hof;
    std::optional<surrogate::SurrogateModel> stability;
    std::vector<std::string> regression_training_smiles;
  };
  std::vector<ModelGeneration> model_history;

  std::vector<MetricSnapshot> snapshots;
  int iterations_completed = 0;

  bool contains(const std::string& smiles) const { return archive_index.count(smiles) > 0; }
  void append(LabeledMolecule lm);

  // checkpoint serialization (model history excluded)
  nlohmann::json to_json() const;
  static RunState from_json(const nlohmann::json& j);
};

}  // namespace alchemloop::loop
