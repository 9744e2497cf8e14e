#include <doctest.h>

#include <set>

#include "alchemloop/loop/campaign.hpp"
#include "alchemloop/molgraph/smiles.hpp"
#include "test_helpers.hpp"

using namespace alchemloop;
using namespace alchemloop::loop;
using molgraph::Molecule;

namespace {

// stable, neutral seed molecules with at least one N-O bond
std::vector<Molecule> make_seed_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  oracle::SyntheticOracle oc;
  std::vector<Molecule> seeds;
  std::set<std::string> seen;
  while (seeds.size() < n) {
    Molecule m = testutil::random_molecule(rng, 20);
    if (!oc.evaluate(m).stable) continue;
    bool has_no = false;
    for (const molgraph::Bond& b : m.bonds()) {
      const auto ea = m.atom(b.a).element;
      const auto eb = m.atom(b.b).element;
      has_no |= (ea == molgraph::Element::N && eb == molgraph::Element::O) ||
                (ea == molgraph::Element::O && eb == molgraph::Element::N);
    }
    if (!has_no) continue;
    if (!seen.insert(molgraph::write_smiles(m)).second) continue;
    seeds.push_back(std::move(m));
  }
  return seeds;
}

CampaignSettings tiny_settings() {
  CampaignSettings s;
  s.ga.generations = 3;
  s.ga.population_size = 20;
  s.ga.exchange = 2;
  s.train.epochs = 4;
  s.train.hidden = 12;
  s.train.folds = 3;
  return s;
}

// counts calls and can be armed to fail
class CountingOracle final : public oracle::Oracle {
 public:
  oracle::OracleResult evaluate(const Molecule& m) override {
    if (fail_after >= 0 && calls >= fail_after) {
      throw oracle::OracleFailure("injected failure");
    }
    ++calls;
    return inner.evaluate(m);
  }
  std::string name() const override { return "counting"; }

  oracle::SyntheticOracle inner;
  long calls = 0;
  long fail_after = -1;
};

}  // namespace

TEST_CASE("select_for_oracle: short candidate lists are returned whole") {
  const auto seeds = make_seed_dataset(60, 1);
  CountingOracle oc;
  RunState state = run_campaign(seeds, {}, tiny_settings(), 7, oc, [](const nlohmann::json&) {});

  std::vector<Molecule> candidates;
  std::vector<std::string> smiles;
  Rng rng(2);
  while (candidates.size() < 10) {
    Molecule m = testutil::random_molecule(rng, 15);
    const std::string s = molgraph::write_smiles(m);
    if (state.contains(s)) continue;
    if (std::find(smiles.begin(), smiles.end(), s) != smiles.end()) continue;
    smiles.push_back(s);
    candidates.push_back(std::move(m));
  }

  IterationPlan plan;
  plan.oracle_budget = 20;
  plan.policy = SelectionPolicy::Random;
  const scoring::Scorer scorer(&*state.rho_model, &*state.hof_model, nullptr,
                               state.property_stats, &state.feature_stats);
  Rng sel(3);
  CHECK(select_for_oracle(candidates, smiles, state, plan, scorer, sel).size() == 10);

  // TopK picks the highest scorers, ties broken lexically
  plan.policy = SelectionPolicy::TopK;
  plan.oracle_budget = 3;
  Rng sel2(3);
  const auto picked = select_for_oracle(candidates, smiles, state, plan, scorer, sel2);
  REQUIRE(picked.size() == 3);
  std::vector<std::pair<double, std::string>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ranked.emplace_back(-scorer(candidates[i]), smiles[i]);
  }
  std::sort(ranked.begin(), ranked.end());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(smiles[picked[k]] == ranked[k].second);
  }

  // Random with a fixed seed is reproducible
  plan.policy = SelectionPolicy::Random;
  plan.oracle_budget = 5;
  Rng s1(11), s2(11);
  CHECK(select_for_oracle(candidates, smiles, state, plan, scorer, s1) ==
        select_for_oracle(candidates, smiles, state, plan, scorer, s2));
}

TEST_CASE("run_campaign: empty plan list labels the seeds only") {
  const auto seeds = make_seed_dataset(60, 5);
  CountingOracle oc;
  const RunState state =
      run_campaign(seeds, {}, tiny_settings(), 1, oc, [](const nlohmann::json&) {});
  CHECK(state.archive.size() == seeds.size());
  CHECK(state.iterations_completed == 0);
  CHECK(oc.calls == static_cast<long>(seeds.size()));
  for (const LabeledMolecule& lm : state.archive) {
    CHECK(lm.iteration == 0);
    CHECK(lm.policy == "seed");
  }
  // property stats are frozen from the stable seed values
  CHECK(state.property_stats.std_rho > 0.0);
  CHECK(state.property_stats.std_hof > 0.0);
}

TEST_CASE("run_iteration: budget zero leaves everything but the snapshot") {
  const auto seeds = make_seed_dataset(60, 9);
  CountingOracle oc;
  const CampaignSettings settings = tiny_settings();
  const RunState before =
      run_campaign(seeds, {}, settings, 3, oc, [](const nlohmann::json&) {});

  IterationPlan plan;
  plan.index = 1;
  plan.oracle_budget = 0;
  const RunState after =
      run_iteration(before, plan, seeds, settings, oc, [](const nlohmann::json&) {});
  CHECK(after.archive.size() == before.archive.size());
  CHECK(after.rho_model == before.rho_model);
  CHECK(after.hof_model == before.hof_model);
  CHECK(after.snapshots.size() == before.snapshots.size() + 1);
  CHECK(after.iterations_completed == 1);
}

TEST_CASE("campaign: bookkeeping, provenance, and no double evaluation") {
  const auto seeds = make_seed_dataset(80, 13);
  CountingOracle oc;
  std::vector<IterationPlan> plans{
      {1, 15, SelectionPolicy::Random, false, true},
      {2, 15, SelectionPolicy::Random, false, true},
      {3, 10, SelectionPolicy::TopK, true, false},
  };
  const RunState state =
      run_campaign(seeds, plans, tiny_settings(), 21, oc, [](const nlohmann::json&) {});

  // no molecule is ever evaluated twice: archive size equals oracle calls
  CHECK(static_cast<long>(state.archive.size()) == oc.calls);
  std::set<std::string> unique;
  for (const LabeledMolecule& lm : state.archive) {
    CHECK(unique.insert(lm.smiles).second);
  }

  // regression training-set provenance: for every retrain x, the set is
  // exactly the stable non-holdout molecules of iterations <= x (seed
  // dataset included)
  REQUIRE(state.model_history.size() == 2);
  for (const auto& gen : state.model_history) {
    std::set<std::string> expected;
    for (const LabeledMolecule& lm : state.archive) {
      if (lm.iteration <= gen.iteration && lm.result.stable && !lm.holdout) {
        expected.insert(lm.smiles);
      }
    }
    const std::set<std::string> actual(gen.regression_training_smiles.begin(),
                                       gen.regression_training_smiles.end());
    REQUIRE(actual == expected);
  }
  CHECK(state.model_history.back().iteration == 2);

  // iteration provenance recorded on every label
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration == 0) {
      CHECK(lm.policy == "seed");
      CHECK_FALSE(lm.pred_rho.has_value());
    } else {
      CHECK((lm.policy == "random" || lm.policy == "topk"));
      CHECK(lm.pred_rho.has_value());
      CHECK(lm.pred_rho0.has_value());
    }
    if (lm.iteration == 3) CHECK(lm.policy == "topk");
  }
  CHECK(state.iterations_completed == 3);
  CHECK(state.snapshots.size() == 3);
}

TEST_CASE("campaign: atomicity under oracle failure") {
  const auto seeds = make_seed_dataset(60, 17);
  const CampaignSettings settings = tiny_settings();
  CountingOracle oc;
  std::vector<IterationPlan> plans{{1, 10, SelectionPolicy::Random, false, true}};
  const RunState good =
      run_campaign(seeds, plans, settings, 33, oc, [](const nlohmann::json&) {});

  // arm the oracle to fail partway through the next iteration
  oc.fail_after = oc.calls + 4;
  IterationPlan plan2{2, 10, SelectionPolicy::Random, false, true};
  std::vector<nlohmann::json> leaked;
  CHECK_THROWS_AS(run_iteration(good, plan2, seeds, settings, oc,
                                [&](const nlohmann::json& e) { leaked.push_back(e); }),
                  oracle::OracleFailure);
  CHECK(leaked.empty());  // nothing was logged for the failed iteration
  // the state object passed in is untouched by construction (const), and
  // its serialized form is still exactly the committed iteration-1 state
  CHECK(good.iterations_completed == 1);
  CHECK(good.to_json() == RunState::from_json(good.to_json()).to_json());
}

TEST_CASE("campaign: no-retrain ablation keeps the initial models") {
  const auto seeds = make_seed_dataset(60, 23);
  CountingOracle oc;
  std::vector<IterationPlan> plans{
      {1, 10, SelectionPolicy::Random, false, false},
      {2, 10, SelectionPolicy::TopK, false, false},
  };
  const RunState state =
      run_campaign(seeds, plans, tiny_settings(), 55, oc, [](const nlohmann::json&) {});
  CHECK(state.rho_model == state.rho_model0);
  CHECK(state.hof_model == state.hof_model0);
  CHECK_FALSE(state.stability_model.has_value());
  CHECK(state.model_history.empty());
}

TEST_CASE("campaign: byte-identical logs under a fixed master seed") {
  const auto seeds = make_seed_dataset(60, 29);
  std::vector<IterationPlan> plans{
      {1, 10, SelectionPolicy::Random, false, true},
      {2, 8, SelectionPolicy::TopK, true, false},
  };
  const auto run_once = [&] {
    CountingOracle oc;
    std::string log;
    run_campaign(seeds, plans, tiny_settings(), 99, oc, [&](const nlohmann::json& e) {
      log += e.dump();
      log += '\n';
    });
    return log;
  };
  const std::string a = run_once();
  const std::string b = run_once();
  CHECK(a == b);
  CHECK(a.find("\"event\":\"run_end\"") != std::string::npos);
}

TEST_CASE("checkpoint: run state serialization round trip") {
  const auto seeds = make_seed_dataset(60, 31);
  CountingOracle oc;
  std::vector<IterationPlan> plans{{1, 10, SelectionPolicy::Random, false, true}};
  const RunState state =
      run_campaign(seeds, plans, tiny_settings(), 77, oc, [](const nlohmann::json&) {});
  const RunState back = RunState::from_json(state.to_json());
  CHECK(back.to_json() == state.to_json());
  CHECK(back.archive.size() == state.archive.size());
  CHECK(back.rho_model == state.rho_model);
  CHECK(back.property_stats.mean_rho == state.property_stats.mean_rho);
}
