#include "alchemloop/loop/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alchemloop/metrics/metrics.hpp"
#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/parallel.hpp"

namespace alchemloop::loop {

using molgraph::Molecule;
using surrogate::Example;
using surrogate::SurrogateModel;
using surrogate::TaskKind;

namespace {

std::vector<double> features_of(const Molecule& m, const molgraph::NormStats& stats) {
  return molgraph::featurize(m, stats).values;
}

std::vector<double> features_of_smiles(const std::string& smiles,
                                       const molgraph::NormStats& stats) {
  return features_of(molgraph::parse_smiles(smiles), stats);
}

scoring::Scorer make_scorer(const RunState& state, bool with_gate, double threshold) {
  const SurrogateModel* stability =
      (with_gate && state.stability_model) ? &*state.stability_model : nullptr;
  return scoring::Scorer(&*state.rho_model, &*state.hof_model, stability, state.property_stats,
                         &state.feature_stats, threshold);
}

// rows of the regression training set: stable, not held out
std::vector<const LabeledMolecule*> regression_rows(const RunState& state) {
  std::vector<const LabeledMolecule*> rows;
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.result.stable && !lm.holdout) rows.push_back(&lm);
  }
  return rows;
}

// rows of the stability-classifier training set: generated molecules only
std::vector<const LabeledMolecule*> classifier_rows(const RunState& state) {
  std::vector<const LabeledMolecule*> rows;
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration >= 1 && !lm.holdout) rows.push_back(&lm);
  }
  return rows;
}

SurrogateModel train_regressor(const RunState& state,
                               const std::vector<const LabeledMolecule*>& rows, bool density,
                               const surrogate::TrainConfig& base, std::uint64_t seed) {
  std::vector<Example> data(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    data[i].x = features_of_smiles(rows[i]->smiles, state.feature_stats);
    data[i].y = density ? rows[i]->result.density : rows[i]->result.solid_hof;
  });
  surrogate::TrainConfig cfg = base;
  cfg.seed = seed;
  return SurrogateModel::train(data, TaskKind::Regression, cfg);
}

struct HoldoutEval {
  std::size_t n = 0;
  double rho_rmse = std::numeric_limits<double>::quiet_NaN();
  double hof_rmse = std::numeric_limits<double>::quiet_NaN();
  double top_precision = std::numeric_limits<double>::quiet_NaN();
  double top_recall = std::numeric_limits<double>::quiet_NaN();
  std::size_t true_top = 0;
  double stability_auc = std::numeric_limits<double>::quiet_NaN();
};

// Evaluates the given models on the cumulative generated holdout.
HoldoutEval evaluate_on_holdout(const RunState& state, const SurrogateModel& rho,
                                const SurrogateModel& hof, const SurrogateModel* stability) {
  HoldoutEval ev;
  std::vector<const LabeledMolecule*> stable_rows;
  std::vector<const LabeledMolecule*> all_rows;
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration < 1 || !lm.holdout) continue;
    all_rows.push_back(&lm);
    if (lm.result.stable) stable_rows.push_back(&lm);
  }
  ev.n = stable_rows.size();
  if (!stable_rows.empty()) {
    std::vector<std::vector<double>> feats(stable_rows.size());
    parallel_for(stable_rows.size(), [&](std::size_t i) {
      feats[i] = features_of_smiles(stable_rows[i]->smiles, state.feature_stats);
    });
    double se_rho = 0.0, se_hof = 0.0;
    std::vector<double> pr(stable_rows.size()), ph(stable_rows.size());
    std::vector<double> tr(stable_rows.size()), th(stable_rows.size());
    for (std::size_t i = 0; i < stable_rows.size(); ++i) {
      pr[i] = rho.predict(feats[i]);
      ph[i] = hof.predict(feats[i]);
      tr[i] = stable_rows[i]->result.density;
      th[i] = stable_rows[i]->result.solid_hof;
      se_rho += (pr[i] - tr[i]) * (pr[i] - tr[i]);
      se_hof += (ph[i] - th[i]) * (ph[i] - th[i]);
    }
    ev.rho_rmse = std::sqrt(se_rho / static_cast<double>(stable_rows.size()));
    ev.hof_rmse = std::sqrt(se_hof / static_cast<double>(stable_rows.size()));
    const metrics::TopClassification tc =
        metrics::top_classification(pr, ph, tr, th, state.property_stats);
    ev.true_top = tc.true_positive + tc.false_negative;
    ev.top_precision = tc.precision();
    ev.top_recall = tc.recall();
  }
  if (stability != nullptr && !all_rows.empty()) {
    std::vector<double> scores(all_rows.size());
    std::vector<char> labels(all_rows.size());
    parallel_for(all_rows.size(), [&](std::size_t i) {
      scores[i] =
          stability->predict(features_of_smiles(all_rows[i]->smiles, state.feature_stats));
    });
    for (std::size_t i = 0; i < all_rows.size(); ++i) labels[i] = all_rows[i]->result.stable;
    ev.stability_auc = surrogate::rank_auc(scores, labels);
  }
  return ev;
}

}  // namespace

std::vector<std::size_t> select_for_oracle(std::span<const Molecule> candidates,
                                           std::span<const std::string> candidate_smiles,
                                           const RunState& state, const IterationPlan& plan,
                                           const scoring::Scorer& scorer, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!state.contains(candidate_smiles[i])) eligible.push_back(i);
  }
  const std::size_t budget = static_cast<std::size_t>(std::max(0, plan.oracle_budget));
  if (eligible.size() <= budget) return eligible;

  if (plan.policy == SelectionPolicy::Random) {
    // partial Fisher-Yates: the first `budget` entries are a uniform sample
    for (std::size_t i = 0; i < budget; ++i) {
      const std::size_t j = i + rng.index(eligible.size() - i);
      std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(budget);
    return eligible;
  }

  std::vector<double> scores(eligible.size());
  parallel_for(eligible.size(), [&](std::size_t k) {
    scores[k] = scorer(candidates[eligible[k]]);
  });
  std::vector<std::size_t> order(eligible.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidate_smiles[eligible[a]] < candidate_smiles[eligible[b]];
  });
  std::vector<std::size_t> out;
  out.reserve(budget);
  for (std::size_t k = 0; k < budget; ++k) out.push_back(eligible[order[k]]);
  return out;
}

RunState run_iteration(const RunState& state, const IterationPlan& plan,
                       std::span<const Molecule> seed_molecules,
                       const CampaignSettings& settings, oracle::Oracle& oracle,
                       const EventSink& sink) {
  std::vector<nlohmann::json> events;
  const auto log = [&](nlohmann::json e) { events.push_back(std::move(e)); };
  const std::string iter_tag = "iter" + std::to_string(plan.index);

  log({{"event", "iteration_start"},
       {"iteration", plan.index},
       {"budget", plan.oracle_budget},
       {"policy", selection_policy_name(plan.policy)},
       {"stability_gate", plan.use_stability_gate},
       {"retrain", plan.retrain_after}});

  const scoring::Scorer scorer =
      make_scorer(state, plan.use_stability_gate, settings.stability_threshold);

  // 1. generate candidates with the current models
  generator::GAConfig ga = settings.ga;
  ga.seed = derive_seed(state.master_seed, iter_tag + "/ga");
  const generator::GenerationArchive generated = generator::run(seed_molecules, scorer, ga);

  // 2. novel candidates (never oracle-evaluated)
  std::vector<Molecule> candidates;
  std::vector<std::string> candidate_smiles;
  std::vector<std::string> candidate_selfies;
  for (const generator::ArchiveEntry& e : generated.entries()) {
    if (state.contains(e.smiles)) continue;
    candidates.push_back(molgraph::parse_smiles(e.smiles));
    candidate_smiles.push_back(e.smiles);
    candidate_selfies.push_back(e.selfies);
  }
  log({{"event", "generated"},
       {"iteration", plan.index},
       {"distinct", generated.size()},
       {"novel", candidates.size()}});

  // 3. select and 4. oracle-evaluate
  Rng select_rng(derive_seed(state.master_seed, iter_tag + "/select"));
  const std::vector<std::size_t> picked =
      select_for_oracle(candidates, candidate_smiles, state, plan, scorer, select_rng);
  std::vector<Molecule> selected;
  for (const std::size_t i : picked) selected.push_back(candidates[i]);
  log({{"event", "selected"}, {"iteration", plan.index}, {"count", selected.size()}});

  const std::vector<oracle::OracleResult> results = oracle.evaluate_batch(selected);

  // 5. commit labels with iteration provenance
  RunState next = state;
  Rng holdout_rng(derive_seed(state.master_seed, iter_tag + "/holdout"));
  std::size_t stable_count = 0;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    LabeledMolecule lm;
    lm.smiles = candidate_smiles[picked[k]];
    lm.result = results[k];
    lm.iteration = plan.index;
    lm.policy = selection_policy_name(plan.policy);
    lm.holdout = holdout_rng.unit() < settings.holdout_fraction;
    const std::vector<double> x = features_of(selected[k], state.feature_stats);
    lm.pred_rho = state.rho_model->predict(x);
    lm.pred_hof = state.hof_model->predict(x);
    lm.pred_rho0 = state.rho_model0->predict(x);
    lm.pred_hof0 = state.hof_model0->predict(x);
    if (state.stability_model) lm.pred_stable = state.stability_model->predict(x);
    stable_count += lm.result.stable;
    log({{"event", "molecule_labeled"}, {"data", lm.to_json()}});
    next.append(std::move(lm));
  }

  // 6. retrain on the grown archive (nothing new to learn from when the
  // iteration labeled nothing)
  if (plan.retrain_after && !selected.empty()) {
    const auto reg_rows = regression_rows(next);
    next.rho_model = train_regressor(next, reg_rows, true, settings.train,
                                     derive_seed(state.master_seed, iter_tag + "/train/rho"));
    log({{"event", "model_trained"},
         {"iteration", plan.index},
         {"role", "rho"},
         {"train_size", reg_rows.size()}});
    next.hof_model = train_regressor(next, reg_rows, false, settings.train,
                                     derive_seed(state.master_seed, iter_tag + "/train/hof"));
    log({{"event", "model_trained"},
         {"iteration", plan.index},
         {"role", "hof"},
         {"train_size", reg_rows.size()}});

    const auto cls_rows = classifier_rows(next);
    bool has_stable = false, has_unstable = false;
    for (const LabeledMolecule* lm : cls_rows) {
      (lm->result.stable ? has_stable : has_unstable) = true;
    }
    if (cls_rows.size() >= 50 && has_stable && has_unstable) {
      std::vector<Example> data(cls_rows.size());
      parallel_for(cls_rows.size(), [&](std::size_t i) {
        data[i].x = features_of_smiles(cls_rows[i]->smiles, next.feature_stats);
        data[i].y = cls_rows[i]->result.stable ? 1.0 : 0.0;
      });
      surrogate::TrainConfig cfg = settings.train;
      cfg.seed = derive_seed(state.master_seed, iter_tag + "/train/stability");
      next.stability_model = SurrogateModel::train(data, TaskKind::BinaryClassification, cfg);
      log({{"event", "model_trained"},
           {"iteration", plan.index},
           {"role", "stability"},
           {"train_size", cls_rows.size()}});
    } else {
      log({{"event", "model_skipped"},
           {"iteration", plan.index},
           {"role", "stability"},
           {"reason", "needs >= 50 generated labels with both classes"}});
    }
    std::vector<std::string> training_smiles;
    training_smiles.reserve(reg_rows.size());
    for (const LabeledMolecule* lm : reg_rows) training_smiles.push_back(lm->smiles);
    next.model_history.push_back({plan.index, *next.rho_model, *next.hof_model,
                                  next.stability_model, std::move(training_smiles)});
  }

  // 7. metric snapshot with whatever models are now current
  const HoldoutEval ev = evaluate_on_holdout(
      next, *next.rho_model, *next.hof_model,
      next.stability_model ? &*next.stability_model : nullptr);
  MetricSnapshot snap;
  snap.iteration = plan.index;
  snap.generated = generated.size();
  snap.novel = candidates.size();
  snap.selected = selected.size();
  snap.labeled_stable = stable_count;
  snap.labeled_unstable = selected.size() - stable_count;
  snap.holdout_regression_n = ev.n;
  snap.rho_rmse = ev.rho_rmse;
  snap.hof_rmse = ev.hof_rmse;
  snap.top_precision = ev.top_precision;
  snap.top_recall = ev.top_recall;
  snap.holdout_true_top = ev.true_top;
  snap.stability_auc = ev.stability_auc;
  next.snapshots.push_back(snap);
  next.iterations_completed = plan.index;
  log({{"event", "iteration_end"}, {"iteration", plan.index}, {"snapshot", snap.to_json()}});

  for (nlohmann::json& e : events) sink(e);
  return next;
}

RunState run_campaign(std::span<const Molecule> seed_molecules,
                      std::span<const IterationPlan> plans, const CampaignSettings& settings,
                      std::uint64_t master_seed, oracle::Oracle& oracle, const EventSink& sink,
                      const CheckpointSink& checkpoint) {
  RunState state;
  state.master_seed = master_seed;

  sink({{"event", "run_start"},
        {"master_seed", master_seed},
        {"seed_count", seed_molecules.size()},
        {"feature_dim", settings.feature_dim},
        {"oracle", oracle.name()},
        {"plans", [&] {
           nlohmann::json a = nlohmann::json::array();
           for (const IterationPlan& p : plans) {
             a.push_back({{"index", p.index},
                          {"budget", p.oracle_budget},
                          {"policy", selection_policy_name(p.policy)},
                          {"stability_gate", p.use_stability_gate},
                          {"retrain", p.retrain_after}});
           }
           return a;
         }()}});

  // label the seed dataset (iteration 0)
  state.feature_stats = molgraph::compute_norm_stats(seed_molecules, settings.feature_dim);
  const std::vector<oracle::OracleResult> seed_results = oracle.evaluate_batch(seed_molecules);
  std::vector<std::string> seed_smiles(seed_molecules.size());
  parallel_for(seed_molecules.size(), [&](std::size_t i) {
    seed_smiles[i] = molgraph::write_smiles(seed_molecules[i]);
  });
  for (std::size_t i = 0; i < seed_molecules.size(); ++i) {
    if (state.contains(seed_smiles[i])) continue;  // duplicate seed entries collapse
    LabeledMolecule lm;
    lm.smiles = seed_smiles[i];
    lm.result = seed_results[i];
    lm.iteration = 0;
    lm.policy = "seed";
    lm.holdout = false;
    sink({{"event", "molecule_labeled"}, {"data", lm.to_json()}});
    state.append(std::move(lm));
  }

  // property statistics over the stable seed values, frozen for the run
  double sum_rho = 0.0, sum_hof = 0.0;
  std::size_t n_stable = 0;
  for (const LabeledMolecule& lm : state.archive) {
    if (!lm.result.stable) continue;
    sum_rho += lm.result.density;
    sum_hof += lm.result.solid_hof;
    ++n_stable;
  }
  if (n_stable < 2) throw std::invalid_argument("seed dataset has fewer than 2 stable molecules");
  const double n = static_cast<double>(n_stable);
  double var_rho = 0.0, var_hof = 0.0;
  for (const LabeledMolecule& lm : state.archive) {
    if (!lm.result.stable) continue;
    var_rho += (lm.result.density - sum_rho / n) * (lm.result.density - sum_rho / n);
    var_hof += (lm.result.solid_hof - sum_hof / n) * (lm.result.solid_hof - sum_hof / n);
  }
  state.property_stats.mean_rho = sum_rho / n;
  state.property_stats.std_rho = std::sqrt(var_rho / n);
  state.property_stats.mean_hof = sum_hof / n;
  state.property_stats.std_hof = std::sqrt(var_hof / n);
  if (state.property_stats.std_rho <= 0.0 || state.property_stats.std_hof <= 0.0) {
    throw std::invalid_argument("seed dataset has degenerate property variance");
  }
  sink({{"event", "seed_stats"},
        {"stable", n_stable},
        {"mean_rho", state.property_stats.mean_rho},
        {"std_rho", state.property_stats.std_rho},
        {"mean_hof", state.property_stats.mean_hof},
        {"std_hof", state.property_stats.std_hof}});

  // initial models (trained on the seed dataset only)
  const auto reg_rows = regression_rows(state);
  state.rho_model = train_regressor(state, reg_rows, true, settings.train,
                                    derive_seed(master_seed, "init/train/rho"));
  state.hof_model = train_regressor(state, reg_rows, false, settings.train,
                                    derive_seed(master_seed, "init/train/hof"));
  state.rho_model0 = state.rho_model;
  state.hof_model0 = state.hof_model;
  sink({{"event", "model_trained"}, {"iteration", 0}, {"role", "rho"}, {"train_size", reg_rows.size()}});
  sink({{"event", "model_trained"}, {"iteration", 0}, {"role", "hof"}, {"train_size", reg_rows.size()}});

  if (checkpoint) checkpoint(state);
  for (const IterationPlan& plan : plans) {
    state = run_iteration(state, plan, seed_molecules, settings, oracle, sink);
    if (checkpoint) checkpoint(state);
  }
  sink({{"event", "run_end"}, {"iterations_completed", state.iterations_completed}});
  return state;
}

}  // namespace alchemloop::loop
