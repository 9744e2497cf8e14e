#include <fstream>
#include <set>

#include "alchemloop/cli/cli.hpp"
#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/oracle/oracle.hpp"

namespace alchemloop::cli {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

}  // namespace

CampaignConfig CampaignConfig::defaults() {
  CampaignConfig c;
  // desk-scale defaults: seed 2,000, budgets 200/200/400/200, GA 40x200,
  // scaled down from the reference schedule to minutes of runtime
  c.seed_spec.count = 2000;
  c.settings.ga.generations = 40;
  c.settings.ga.population_size = 200;
  c.settings.ga.exchange = 5;
  c.plans = {
      {1, 200, loop::SelectionPolicy::Random, false, true},
      {2, 200, loop::SelectionPolicy::Random, false, true},
      {3, 400, loop::SelectionPolicy::Random, false, true},
      {4, 200, loop::SelectionPolicy::TopK, true, false},
  };
  return c;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  CampaignConfig c = defaults();
  reject_unknown_keys(j, {"master_seed", "output_dir", "seed_dataset", "oracle", "ga",
                          "surrogate", "loop", "iterations"},
                      "config root");
  c.master_seed = j.value("master_seed", c.master_seed);
  c.output_dir = j.value("output_dir", c.output_dir);

  if (j.contains("seed_dataset")) {
    const auto& sd = j.at("seed_dataset");
    reject_unknown_keys(sd, {"path", "generate"}, "seed_dataset");
    if (sd.contains("path") && sd.contains("generate")) {
      throw ConfigError("seed_dataset: give either \"path\" or \"generate\", not both");
    }
    if (sd.contains("path")) {
      c.seed_path = sd.at("path").get<std::string>();
    } else if (sd.contains("generate")) {
      const auto& g = sd.at("generate");
      reject_unknown_keys(g, {"count", "require_no_bond", "min_tokens", "max_tokens"},
                          "seed_dataset.generate");
      c.seed_spec.count = g.value("count", c.seed_spec.count);
      c.seed_spec.require_no_bond = g.value("require_no_bond", c.seed_spec.require_no_bond);
      c.seed_spec.min_tokens = g.value("min_tokens", c.seed_spec.min_tokens);
      c.seed_spec.max_tokens = g.value("max_tokens", c.seed_spec.max_tokens);
      if (c.seed_spec.count < 1) throw ConfigError("seed_dataset.generate.count must be >= 1");
      if (c.seed_spec.min_tokens < 1 || c.seed_spec.max_tokens < c.seed_spec.min_tokens) {
        throw ConfigError("seed_dataset.generate token bounds are inconsistent");
      }
    }
  }

  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    reject_unknown_keys(o, {"kind", "command", "timeout_ms"}, "oracle");
    c.oracle.kind = o.value("kind", c.oracle.kind);
    c.oracle.command = o.value("command", c.oracle.command);
    c.oracle.timeout_ms = o.value("timeout_ms", c.oracle.timeout_ms);
    if (c.oracle.kind != "synthetic" && c.oracle.kind != "external") {
      throw ConfigError("oracle.kind must be \"synthetic\" or \"external\"");
    }
    if (c.oracle.kind == "external" && c.oracle.command.empty()) {
      throw ConfigError("oracle.kind \"external\" requires oracle.command");
    }
  }

  if (j.contains("ga")) {
    const auto& g = j.at("ga");
    reject_unknown_keys(g,
                        {"generations", "population_size", "exchange", "crossover_fraction",
                         "exploit_oversample", "joint_similarity"},
                        "ga");
    auto& ga = c.settings.ga;
    ga.generations = g.value("generations", ga.generations);
    ga.population_size = g.value("population_size", ga.population_size);
    ga.exchange = g.value("exchange", ga.exchange);
    ga.crossover_fraction = g.value("crossover_fraction", ga.crossover_fraction);
    ga.exploit_oversample = g.value("exploit_oversample", ga.exploit_oversample);
    const std::string joint = g.value("joint_similarity", std::string("min"));
    if (joint == "min") {
      ga.joint_similarity = selfies::JointSimilarity::Min;
    } else if (joint == "mean") {
      ga.joint_similarity = selfies::JointSimilarity::Mean;
    } else {
      throw ConfigError("ga.joint_similarity must be \"min\" or \"mean\"");
    }
    if (ga.generations < 0 || ga.population_size < 1) {
      throw ConfigError("ga.generations must be >= 0 and ga.population_size >= 1");
    }
    if (ga.exchange < 0 || ga.exchange >= ga.population_size) {
      throw ConfigError("ga.exchange must be smaller than ga.population_size");
    }
    if (ga.crossover_fraction < 0.0 || ga.crossover_fraction > 1.0) {
      throw ConfigError("ga.crossover_fraction must lie in [0, 1]");
    }
  }

  if (j.contains("surrogate")) {
    const auto& s = j.at("surrogate");
    reject_unknown_keys(s,
                        {"epochs", "folds", "hidden", "learning_rate", "batch_size",
                         "train_frac", "val_frac", "test_frac"},
                        "surrogate");
    auto& t = c.settings.train;
    t.epochs = s.value("epochs", t.epochs);
    t.folds = s.value("folds", t.folds);
    t.hidden = s.value("hidden", t.hidden);
    t.learning_rate = s.value("learning_rate", t.learning_rate);
    t.batch_size = s.value("batch_size", t.batch_size);
    t.train_frac = s.value("train_frac", t.train_frac);
    t.val_frac = s.value("val_frac", t.val_frac);
    t.test_frac = s.value("test_frac", t.test_frac);
    if (t.epochs < 1) throw ConfigError("surrogate.epochs must be >= 1");
    if (std::fabs(t.train_frac + t.val_frac + t.test_frac - 1.0) > 1e-9) {
      throw ConfigError("surrogate split fractions must sum to 1");
    }
  }

  if (j.contains("loop")) {
    const auto& l = j.at("loop");
    reject_unknown_keys(l, {"holdout_fraction", "stability_threshold", "feature_dim"}, "loop");
    c.settings.holdout_fraction = l.value("holdout_fraction", c.settings.holdout_fraction);
    c.settings.stability_threshold =
        l.value("stability_threshold", c.settings.stability_threshold);
    c.settings.feature_dim = l.value("feature_dim", c.settings.feature_dim);
    if (c.settings.holdout_fraction < 0.0 || c.settings.holdout_fraction >= 1.0) {
      throw ConfigError("loop.holdout_fraction must lie in [0, 1)");
    }
    if (c.settings.feature_dim < 20) throw ConfigError("loop.feature_dim must be >= 20");
  }

  if (j.contains("iterations")) {
    c.plans.clear();
    int index = 1;
    for (const auto& it : j.at("iterations")) {
      reject_unknown_keys(it, {"budget", "policy", "stability_gate", "retrain"},
                          "iterations[" + std::to_string(index - 1) + "]");
      loop::IterationPlan p;
      p.index = index++;
      p.oracle_budget = it.value("budget", 0);
      p.policy = loop::selection_policy_from_name(it.value("policy", std::string("random")));
      p.use_stability_gate = it.value("stability_gate", false);
      p.retrain_after = it.value("retrain", true);
      if (p.oracle_budget < 0) throw ConfigError("iteration budget must be >= 0");
      c.plans.push_back(p);
    }
  }
  return c;
}

nlohmann::json CampaignConfig::to_json() const {
  nlohmann::json j;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  if (seed_path) {
    j["seed_dataset"] = {{"path", *seed_path}};
  } else {
    j["seed_dataset"] = {{"generate",
                          {{"count", seed_spec.count},
                           {"require_no_bond", seed_spec.require_no_bond},
                           {"min_tokens", seed_spec.min_tokens},
                           {"max_tokens", seed_spec.max_tokens}}}};
  }
  j["oracle"] = {{"kind", oracle.kind}};
  if (oracle.kind == "external") {
    j["oracle"]["command"] = oracle.command;
    j["oracle"]["timeout_ms"] = oracle.timeout_ms;
  }
  j["ga"] = {{"generations", settings.ga.generations},
             {"population_size", settings.ga.population_size},
             {"exchange", settings.ga.exchange},
             {"crossover_fraction", settings.ga.crossover_fraction},
             {"exploit_oversample", settings.ga.exploit_oversample},
             {"joint_similarity",
              settings.ga.joint_similarity == selfies::JointSimilarity::Min ? "min" : "mean"}};
  j["surrogate"] = {{"epochs", settings.train.epochs},
                    {"folds", settings.train.folds},
                    {"hidden", settings.train.hidden},
                    {"learning_rate", settings.train.learning_rate},
                    {"batch_size", settings.train.batch_size},
                    {"train_frac", settings.train.train_frac},
                    {"val_frac", settings.train.val_frac},
                    {"test_frac", settings.train.test_frac}};
  j["loop"] = {{"holdout_fraction", settings.holdout_fraction},
               {"stability_threshold", settings.stability_threshold},
               {"feature_dim", settings.feature_dim}};
  j["iterations"] = nlohmann::json::array();
  for (const loop::IterationPlan& p : plans) {
    j["iterations"].push_back({{"budget", p.oracle_budget},
                               {"policy", loop::selection_policy_name(p.policy)},
                               {"stability_gate", p.use_stability_gate},
                               {"retrain", p.retrain_after}});
  }
  return j;
}

namespace {

// Token weights for seed sampling, tilted toward the nitrogen/oxygen-rich
// chemistry the seed dataset is meant to represent. Rejection sampling on
// top of this still explores the whole alphabet.
constexpr int kSeedTokenWeights[selfies::kAlphabetSize] = {
    6,  // [C]
    4,  // [N]
    4,  // [O]
    2,  // [N+1]
    2,  // [O-1]
    3,  // [=C]
    1,  // [#C]
    3,  // [=N]
    1,  // [#N]
    4,  // [=O]
    3,  // [Branch1]
    1,  // [Branch2]
    1,  // [Branch3]
    3,  // [Ring1]
    1,  // [Ring2]
    1,  // [Ring3]
};

selfies::Token weighted_seed_token(Rng& rng) {
  int total = 0;
  for (const int w : kSeedTokenWeights) total += w;
  auto roll = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
  for (std::size_t t = 0; t < selfies::kAlphabetSize; ++t) {
    roll -= kSeedTokenWeights[t];
    if (roll < 0) return static_cast<selfies::Token>(t);
  }
  return selfies::Token::C;
}

}  // namespace

std::vector<std::string> generate_seed_smiles(const SeedSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "seedgen"));
  oracle::SyntheticOracle stability_check;
  std::vector<std::string> lines;
  std::set<std::string> seen;
  const std::size_t span = spec.max_tokens - spec.min_tokens + 1;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 20000 * std::max<std::size_t>(1, spec.count);
  while (lines.size() < spec.count) {
    if (++attempts > max_attempts) {
      throw ConfigError("seed generation rejected too many candidates; relax the spec");
    }
    const std::size_t len = spec.min_tokens + rng.index(span);
    selfies::SelfiesString s;
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(weighted_seed_token(rng));
    }
    const molgraph::Molecule m = selfies::decode(s);
    if (m.net_formal_charge() != 0) continue;
    if (spec.require_no_bond) {
      bool has_no = false;
      for (const molgraph::Bond& b : m.bonds()) {
        const auto ea = m.atom(b.a).element;
        const auto eb = m.atom(b.b).element;
        has_no |= (ea == molgraph::Element::N && eb == molgraph::Element::O) ||
                  (ea == molgraph::Element::O && eb == molgraph::Element::N);
      }
      if (!has_no) continue;
    }
    if (!stability_check.evaluate(m).stable) continue;  // avoid the motif rules
    std::string smiles = molgraph::write_smiles(m);
    if (!seen.insert(smiles).second) continue;
    lines.push_back(std::move(smiles));
  }
  return lines;
}

std::vector<molgraph::Molecule> load_smiles_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open seed dataset file: " + path.string());
  std::vector<molgraph::Molecule> molecules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      molecules.push_back(molgraph::parse_smiles(line));
    } catch (const std::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (molecules.empty()) throw ConfigError("seed dataset file is empty: " + path.string());
  return molecules;
}

void cmd_seed(const SeedSpec& spec, std::uint64_t seed, const std::filesystem::path& out) {
  const std::vector<std::string> lines = generate_seed_smiles(spec, seed);
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write seed dataset file: " + out.string());
  for (const std::string& s : lines) f << s << '\n';
}

}  // namespace alchemloop::cli
