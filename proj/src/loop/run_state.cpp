#include "alchemloop/loop/run_state.hpp"

#include <cmath>

namespace alchemloop::loop {

const char* selection_policy_name(SelectionPolicy p) {
  return p == SelectionPolicy::Random ? "random" : "topk";
}

SelectionPolicy selection_policy_from_name(const std::string& name) {
  if (name == "random") return SelectionPolicy::Random;
  if (name == "topk") return SelectionPolicy::TopK;
  throw std::invalid_argument("unknown selection policy: " + name);
}

namespace {

nlohmann::json opt_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<double> opt_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json nan_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double nan_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json LabeledMolecule::to_json() const {
  return nlohmann::json{{"smiles", smiles},
                        {"stable", result.stable},
                        {"density", result.stable ? nlohmann::json(result.density) : nullptr},
                        {"hof", result.stable ? nlohmann::json(result.solid_hof) : nullptr},
                        {"reason", oracle::failure_reason_name(result.reason)},
                        {"iteration", iteration},
                        {"policy", policy},
                        {"holdout", holdout},
                        {"pred_rho", opt_to_json(pred_rho)},
                        {"pred_hof", opt_to_json(pred_hof)},
                        {"pred_rho0", opt_to_json(pred_rho0)},
                        {"pred_hof0", opt_to_json(pred_hof0)},
                        {"pred_stable", opt_to_json(pred_stable)}};
}

LabeledMolecule LabeledMolecule::from_json(const nlohmann::json& j) {
  LabeledMolecule lm;
  lm.smiles = j.at("smiles").get<std::string>();
  lm.result.stable = j.at("stable").get<bool>();
  if (lm.result.stable) {
    lm.result.density = j.at("density").get<double>();
    lm.result.solid_hof = j.at("hof").get<double>();
  }
  lm.result.reason = oracle::failure_reason_from_name(j.value("reason", "none"));
  lm.iteration = j.at("iteration").get<int>();
  lm.policy = j.at("policy").get<std::string>();
  lm.holdout = j.at("holdout").get<bool>();
  lm.pred_rho = opt_from_json(j, "pred_rho");
  lm.pred_hof = opt_from_json(j, "pred_hof");
  lm.pred_rho0 = opt_from_json(j, "pred_rho0");
  lm.pred_hof0 = opt_from_json(j, "pred_hof0");
  lm.pred_stable = opt_from_json(j, "pred_stable");
  return lm;
}

nlohmann::json MetricSnapshot::to_json() const {
  return nlohmann::json{{"iteration", iteration},
                        {"generated", generated},
                        {"novel", novel},
                        {"selected", selected},
                        {"labeled_stable", labeled_stable},
                        {"labeled_unstable", labeled_unstable},
                        {"holdout_regression_n", holdout_regression_n},
                        {"rho_rmse", nan_to_json(rho_rmse)},
                        {"hof_rmse", nan_to_json(hof_rmse)},
                        {"top_precision", nan_to_json(top_precision)},
                        {"top_recall", nan_to_json(top_recall)},
                        {"holdout_true_top", holdout_true_top},
                        {"stability_auc", nan_to_json(stability_auc)}};
}

MetricSnapshot MetricSnapshot::from_json(const nlohmann::json& j) {
  MetricSnapshot s;
  s.iteration = j.at("iteration").get<int>();
  s.generated = j.at("generated").get<std::size_t>();
  s.novel = j.at("novel").get<std::size_t>();
  s.selected = j.at("selected").get<std::size_t>();
  s.labeled_stable = j.at("labeled_stable").get<std::size_t>();
  s.labeled_unstable = j.at("labeled_unstable").get<std::size_t>();
  s.holdout_regression_n = j.at("holdout_regression_n").get<std::size_t>();
  s.rho_rmse = nan_from_json(j, "rho_rmse");
  s.hof_rmse = nan_from_json(j, "hof_rmse");
  s.top_precision = nan_from_json(j, "top_precision");
  s.top_recall = nan_from_json(j, "top_recall");
  s.holdout_true_top = j.at("holdout_true_top").get<std::size_t>();
  s.stability_auc = nan_from_json(j, "stability_auc");
  return s;
}

void RunState::append(LabeledMolecule lm) {
  if (archive_index.count(lm.smiles)) {
    throw std::logic_error("molecule labeled twice: " + lm.smiles);
  }
  archive_index.emplace(lm.smiles, archive.size());
  archive.push_back(std::move(lm));
}

nlohmann::json RunState::to_json() const {
  nlohmann::json j;
  j["format"] = "alchemloop-checkpoint-v1";
  j["master_seed"] = master_seed;
  j["iterations_completed"] = iterations_completed;
  j["feature_stats"] = {{"mean", feature_stats.mean}, {"stddev", feature_stats.stddev}};
  j["property_stats"] = {{"mean_rho", property_stats.mean_rho},
                         {"std_rho", property_stats.std_rho},
                         {"mean_hof", property_stats.mean_hof},
                         {"std_hof", property_stats.std_hof}};
  j["archive"] = nlohmann::json::array();
  for (const LabeledMolecule& lm : archive) j["archive"].push_back(lm.to_json());
  j["snapshots"] = nlohmann::json::array();
  for (const MetricSnapshot& s : snapshots) j["snapshots"].push_back(s.to_json());
  const auto model_or_null = [](const std::optional<surrogate::SurrogateModel>& m) {
    return m ? m->to_json() : nlohmann::json(nullptr);
  };
  j["models"] = {{"rho", model_or_null(rho_model)},
                 {"hof", model_or_null(hof_model)},
                 {"stability", model_or_null(stability_model)},
                 {"rho0", model_or_null(rho_model0)},
                 {"hof0", model_or_null(hof_model0)}};
  return j;
}

RunState RunState::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "alchemloop-checkpoint-v1") {
    throw std::invalid_argument("unrecognized checkpoint format");
  }
  RunState s;
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.iterations_completed = j.at("iterations_completed").get<int>();
  s.feature_stats.mean = j.at("feature_stats").at("mean").get<std::vector<double>>();
  s.feature_stats.stddev = j.at("feature_stats").at("stddev").get<std::vector<double>>();
  const auto& ps = j.at("property_stats");
  s.property_stats = {ps.at("mean_rho").get<double>(), ps.at("std_rho").get<double>(),
                      ps.at("mean_hof").get<double>(), ps.at("std_hof").get<double>()};
  for (const auto& a : j.at("archive")) s.append(LabeledMolecule::from_json(a));
  for (const auto& sn : j.at("snapshots")) s.snapshots.push_back(MetricSnapshot::from_json(sn));
  const auto load_model = [&](const char* key) -> std::optional<surrogate::SurrogateModel> {
    const auto& m = j.at("models").at(key);
    if (m.is_null()) return std::nullopt;
    return surrogate::SurrogateModel::from_json(m);
  };
  s.rho_model = load_model("rho");
  s.hof_model = load_model("hof");
  s.stability_model = load_model("stability");
  s.rho_model0 = load_model("rho0");
  s.hof_model0 = load_model("hof0");
  return s;
}

}  // namespace alchemloop::loop
