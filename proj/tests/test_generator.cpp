#include <doctest.h>

#include <set>

#include "alchemloop/generator/generator.hpp"
#include "alchemloop/molgraph/smiles.hpp"
#include "test_helpers.hpp"

using namespace alchemloop;
using namespace alchemloop::generator;
using molgraph::Molecule;

namespace {

// cheap deterministic structural objective for GA tests
double toy_score(const Molecule& m) {
  double s = static_cast<double>(m.heavy_atom_count());
  for (const molgraph::Bond& b : m.bonds()) {
    const auto ea = m.atom(b.a).element;
    const auto eb = m.atom(b.b).element;
    const bool no = (ea == molgraph::Element::N && eb == molgraph::Element::O) ||
                    (ea == molgraph::Element::O && eb == molgraph::Element::N);
    if (no) s += 2.0;
  }
  return s;
}

std::vector<Molecule> make_seeds(std::size_t n, std::uint64_t seed, std::size_t max_len = 20) {
  Rng rng(seed);
  std::vector<Molecule> seeds;
  std::set<std::string> seen;
  while (seeds.size() < n) {
    Molecule m = testutil::random_molecule(rng, max_len);
    if (m.net_formal_charge() != 0) continue;
    if (!seen.insert(molgraph::write_smiles(m)).second) continue;
    seeds.push_back(std::move(m));
  }
  return seeds;
}

void check_population_integrity(const Population& pop, std::size_t size) {
  REQUIRE(pop.members.size() == size);
  std::set<std::string> smiles;
  for (const Member& m : pop.members) {
    REQUIRE(smiles.insert(m.smiles).second);
  }
}

}  // namespace

TEST_CASE("init_populations: top scorers are selected") {
  const auto seeds = make_seeds(1000, 42);
  GAConfig cfg;
  cfg.population_size = 500;
  Rng rng(1);
  const auto [explore, exploit] = init_populations(seeds, toy_score, cfg, rng);
  check_population_integrity(explore, 500);
  check_population_integrity(exploit, 500);

  // selection rule: members are exactly the 500 best-scoring distinct seeds
  std::vector<double> scores;
  std::set<std::string> seen;
  for (const Molecule& m : seeds) {
    if (seen.insert(molgraph::write_smiles(m)).second) scores.push_back(toy_score(m));
  }
  std::sort(scores.rbegin(), scores.rend());
  const double cutoff = scores[499];
  for (const Member& m : explore.members) {
    CHECK(m.score >= cutoff);
  }
}

TEST_CASE("init_populations: padding by mutation when seeds are scarce") {
  const auto seeds = make_seeds(10, 7);
  GAConfig cfg;
  cfg.population_size = 100;
  Rng rng(2);
  const auto [explore, exploit] = init_populations(seeds, toy_score, cfg, rng);
  check_population_integrity(explore, 100);
}

TEST_CASE("init_populations: deterministic under a fixed rng seed") {
  const auto seeds = make_seeds(300, 9);
  GAConfig cfg;
  cfg.population_size = 200;
  Rng r1(5), r2(5);
  const auto a = init_populations(seeds, toy_score, cfg, r1);
  const auto b = init_populations(seeds, toy_score, cfg, r2);
  for (std::size_t i = 0; i < a.first.members.size(); ++i) {
    CHECK(a.first.members[i].smiles == b.first.members[i].smiles);
  }
  CHECK_THROWS_AS(init_populations(std::vector<Molecule>{}, toy_score, cfg, r1), EmptySeed);
}

TEST_CASE("step_generation: integrity, elitism, exchange conservation") {
  const auto seeds = make_seeds(300, 11);
  GAConfig cfg;
  cfg.population_size = 60;
  cfg.exchange = 5;
  Rng rng(3);
  auto [explore, exploit] = init_populations(seeds, toy_score, cfg, rng);
  GenerationArchive archive;

  const auto min_score = [](const Population& p) {
    double s = 1e300;
    for (const Member& m : p.members) s = std::min(s, m.score);
    return s;
  };
  const auto best_score = [](const Population& p) {
    double s = -1e300;
    for (const Member& m : p.members) s = std::max(s, m.score);
    return s;
  };

  double prev_min = min_score(explore);
  double prev_best = best_score(explore);
  for (int g = 1; g <= 10; ++g) {
    step_generation(explore, exploit, toy_score, cfg, rng, g, archive);
    check_population_integrity(explore, 60);
    check_population_integrity(exploit, 60);
    CHECK(explore.members.size() + exploit.members.size() == 120);  // conservation

    // elitist pooling: the exploration survivor floor cannot drop, except
    // through the exchange step which may import exploitation members;
    // the best score never drops in any case
    CHECK(best_score(explore) >= prev_best);
    prev_best = best_score(explore);
    prev_min = min_score(explore);
  }
  CHECK(archive.size() > 0);
}

TEST_CASE("step_generation: constant scorer resolves ties lexically") {
  const auto seeds = make_seeds(200, 13);
  const Scorer constant = [](const Molecule&) { return 1.0; };
  GAConfig cfg;
  cfg.population_size = 50;
  Rng r1(8), r2(8);
  auto [ea, xa] = init_populations(seeds, constant, cfg, r1);
  auto [eb, xb] = init_populations(seeds, constant, cfg, r2);
  GenerationArchive arch_a, arch_b;
  for (int g = 1; g <= 3; ++g) {
    step_generation(ea, xa, constant, cfg, r1, g, arch_a);
    step_generation(eb, xb, constant, cfg, r2, g, arch_b);
  }
  // identical populations and archives across the two executions
  for (std::size_t i = 0; i < ea.members.size(); ++i) {
    CHECK(ea.members[i].smiles == eb.members[i].smiles);
  }
  REQUIRE(arch_a.size() == arch_b.size());
  for (std::size_t i = 0; i < arch_a.size(); ++i) {
    CHECK(arch_a.entries()[i].smiles == arch_b.entries()[i].smiles);
    CHECK(arch_a.entries()[i].generation == arch_b.entries()[i].generation);
  }
}

TEST_CASE("run: zero generations yields an empty archive") {
  const auto seeds = make_seeds(100, 17);
  GAConfig cfg;
  cfg.population_size = 50;
  cfg.generations = 0;
  CHECK(run(seeds, toy_score, cfg).size() == 0);
}

TEST_CASE("run: archive has no duplicates and filters charged molecules") {
  const auto seeds = make_seeds(150, 19);
  GAConfig cfg;
  cfg.population_size = 40;
  cfg.generations = 20;
  cfg.seed = 23;
  const GenerationArchive archive = run(seeds, toy_score, cfg);
  std::set<std::string> seen;
  for (const ArchiveEntry& e : archive.entries()) {
    REQUIRE(seen.insert(e.smiles).second);
    const Molecule m = molgraph::parse_smiles(e.smiles);
    REQUIRE(m.net_formal_charge() == 0);
  }
  CHECK(archive.size() > 40);
}

TEST_CASE("run: determinism of a full 3-generation run") {
  const auto seeds = make_seeds(100, 29);
  GAConfig cfg;
  cfg.population_size = 30;
  cfg.generations = 3;
  cfg.seed = 31;
  const GenerationArchive a = run(seeds, toy_score, cfg);
  const GenerationArchive b = run(seeds, toy_score, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries()[i].smiles == b.entries()[i].smiles);
    CHECK(a.entries()[i].score == b.entries()[i].score);
  }
}

TEST_CASE("archive: jsonl round trip") {
  const auto seeds = make_seeds(100, 37);
  GAConfig cfg;
  cfg.population_size = 30;
  cfg.generations = 3;
  cfg.seed = 5;
  const GenerationArchive archive = run(seeds, toy_score, cfg);
  const GenerationArchive back = GenerationArchive::from_jsonl(archive.to_jsonl());
  REQUIRE(back.size() == archive.size());
  for (std::size_t i = 0; i < archive.size(); ++i) {
    CHECK(back.entries()[i].smiles == archive.entries()[i].smiles);
    CHECK(back.entries()[i].selfies == archive.entries()[i].selfies);
    CHECK(back.entries()[i].generation == archive.entries()[i].generation);
    CHECK(back.entries()[i].score == archive.entries()[i].score);
  }
}

// Desk-scale regression range, measured once on the reference seed recipe
// (random constrained decodes) and pinned broadly. Runs the paper-shaped
// 200-generation, 500-molecule configuration.
TEST_CASE("run: archive volume of the 200x500 configuration" * doctest::timeout(600)) {
  const auto seeds = make_seeds(1000, 41);
  GAConfig cfg;
  cfg.population_size = 500;
  cfg.generations = 200;
  cfg.seed = 43;
  const GenerationArchive archive = run(seeds, toy_score, cfg);
  // measured 24,835 on this fixed configuration; pinned with wide margins
  MESSAGE("archive size: ", archive.size());
  CHECK(archive.size() >= 8000);
  CHECK(archive.size() <= 80000);
}
