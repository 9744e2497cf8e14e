#pragma once

#include <functional>
#include <span>

#include "alchemloop/generator/generator.hpp"
#include "alchemloop/loop/run_state.hpp"
#include "alchemloop/rng.hpp"

namespace alchemloop::loop {

// JSON-lines event sink. Events within one iteration are buffered by the
// campaign and only delivered if the iteration commits, so a failed oracle
// leaves no trace in the log.
using EventSink = std::function<void(const nlohmann::json&)>;

struct CampaignSettings {
  generator::GAConfig ga;
  surrogate::TrainConfig train;
  double holdout_fraction = 0.1;
  double stability_threshold = 0.5;
  std::size_t feature_dim = molgraph::kDefaultFeatureDim;
};

// Uniform sample without replacement (Random) or the top scorers under the
// Full Objective Score (TopK), never returning already-labeled molecules.
// `candidates` must be deduplicated; the result is at most `budget` long.
std::vector<std::size_t> select_for_oracle(std::span<const molgraph::Molecule> candidates,
                                           std::span<const std::string> candidate_smiles,
                                           const RunState& state, const IterationPlan& plan,
                                           const scoring::Scorer& scorer, Rng& rng);

// One active-learning iteration: generate with the current models, select,
// oracle-label, optionally retrain, snapshot. Returns the advanced state;
// throws oracle::OracleFailure without any side effects on `state`.
RunState run_iteration(const RunState& state, const IterationPlan& plan,
                       std::span<const molgraph::Molecule> seed_molecules,
                       const CampaignSettings& settings, oracle::Oracle& oracle,
                       const EventSink& sink);

// Full campaign: label the seed dataset, train the initial models, then run
// the plans in order. Deterministic for a fixed master seed. `checkpoint`
// (optional) fires after the seed phase and after every committed
// iteration, for callers that persist resumable state.
using CheckpointSink = std::function<void(const RunState&)>;
RunState run_campaign(std::span<const molgraph::Molecule> seed_molecules,
                      std::span<const IterationPlan> plans, const CampaignSettings& settings,
                      std::uint64_t master_seed, oracle::Oracle& oracle, const EventSink& sink,
                      const CheckpointSink& checkpoint = {});

}  // namespace alchemloop::loop
