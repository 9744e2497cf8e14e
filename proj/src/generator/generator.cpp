#include "alchemloop/generator/generator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/parallel.hpp"

namespace alchemloop::generator {

using molgraph::Molecule;
using selfies::SelfiesString;

namespace {

bool member_before(const Member& a, const Member& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.smiles < b.smiles;  // lexical tie-break for reproducibility
}

Member make_member(SelfiesString genotype, const Scorer& scorer) {
  Molecule m = selfies::decode(genotype);
  std::string smiles = molgraph::write_smiles(m);
  const double score = scorer(m);
  molgraph::Fingerprint fp = molgraph::fingerprint(m);
  return Member{std::move(genotype), std::move(m), std::move(smiles), score, std::move(fp)};
}

std::vector<Member> make_members(std::vector<SelfiesString> genotypes, const Scorer& scorer) {
  std::vector<std::optional<Member>> slots(genotypes.size());
  parallel_for(genotypes.size(), [&](std::size_t i) {
    slots[i] = make_member(std::move(genotypes[i]), scorer);
  });
  std::vector<Member> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<const Member*> top_members(const Population& pop, std::size_t k) {
  std::vector<const Member*> ptrs;
  ptrs.reserve(pop.members.size());
  for (const Member& m : pop.members) ptrs.push_back(&m);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const Member* a, const Member* b) { return member_before(*a, *b); });
  if (ptrs.size() > k) ptrs.resize(k);
  return ptrs;
}

bool is_neutral_chon(const Molecule& m) {
  if (m.net_formal_charge() != 0) return false;
  for (const molgraph::Atom& a : m.atoms()) {
    switch (a.element) {
      case molgraph::Element::C:
      case molgraph::Element::H:
      case molgraph::Element::N:
      case molgraph::Element::O:
        break;
      default:
        return false;
    }
  }
  return true;
}

}  // namespace

bool GenerationArchive::add(const Molecule& m, const std::string& smiles,
                            const SelfiesString& genotype, int generation, double score) {
  if (!is_neutral_chon(m)) return false;
  if (index_.count(smiles)) return false;
  index_.emplace(smiles, entries_.size());
  entries_.push_back({smiles, selfies::to_string(genotype), generation, score});
  return true;
}

std::string GenerationArchive::to_jsonl() const {
  std::string out;
  for (const ArchiveEntry& e : entries_) {
    nlohmann::json j{{"smiles", e.smiles},
                     {"selfies", e.selfies},
                     {"generation", e.generation},
                     {"score", e.score}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

GenerationArchive GenerationArchive::from_jsonl(const std::string& text) {
  GenerationArchive archive;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string smiles = j.at("smiles").get<std::string>();
    if (archive.index_.count(smiles)) continue;
    archive.index_.emplace(smiles, archive.entries_.size());
    archive.entries_.push_back({smiles, j.at("selfies").get<std::string>(),
                                j.at("generation").get<int>(), j.at("score").get<double>()});
  }
  return archive;
}

std::pair<Population, Population> init_populations(std::span<const Molecule> seeds,
                                                   const Scorer& scorer, const GAConfig& cfg,
                                                   Rng& rng) {
  if (seeds.empty()) throw EmptySeed("no seed molecules");
  const std::size_t size = static_cast<std::size_t>(cfg.population_size);

  std::vector<SelfiesString> genotypes;
  for (const Molecule& m : seeds) {
    try {
      genotypes.push_back(selfies::encode(m));
    } catch (const selfies::Inexpressible&) {
      // seeds outside the alphabet's expressible set cannot enter the GA
    }
  }
  if (genotypes.empty()) throw EmptySeed("no seed molecule is expressible in the alphabet");

  std::vector<Member> members = make_members(std::move(genotypes), scorer);
  std::sort(members.begin(), members.end(), member_before);
  std::vector<Member> unique;
  std::set<std::string> seen;
  for (Member& m : members) {
    if (seen.insert(m.smiles).second) unique.push_back(std::move(m));
  }
  if (unique.size() > size) {
    unique.erase(unique.begin() + static_cast<long>(size), unique.end());
  }

  // pad with mutants of existing members until the population is full
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * size;
  while (unique.size() < size) {
    if (++attempts > max_attempts) {
      throw EmptySeed("could not pad the population to full size by mutation");
    }
    const Member& parent = unique[rng.index(unique.size())];
    Member child = make_member(selfies::mutate(parent.genotype, rng), scorer);
    if (seen.insert(child.smiles).second) unique.push_back(std::move(child));
  }

  Population exploration{PopulationKind::Exploration, unique};
  Population exploitation{PopulationKind::Exploitation, std::move(unique)};
  return {std::move(exploration), std::move(exploitation)};
}

void step_generation(Population& exploration, Population& exploitation, const Scorer& scorer,
                     const GAConfig& cfg, Rng& rng, int generation, GenerationArchive& archive) {
  const std::size_t size = static_cast<std::size_t>(cfg.population_size);

  // --- exploration offspring: crossover_fraction crossovers, rest mutants
  const std::size_t n_cross =
      static_cast<std::size_t>(std::lround(cfg.crossover_fraction * static_cast<double>(size)));
  std::vector<SelfiesString> offspring_genotypes;
  offspring_genotypes.reserve(size);
  for (std::size_t i = 0; i < n_cross; ++i) {
    const std::size_t pa = rng.index(exploration.members.size());
    std::size_t pb = pa;
    if (exploration.members.size() > 1) {
      pb = rng.index(exploration.members.size() - 1);
      if (pb >= pa) ++pb;
    }
    offspring_genotypes.push_back(selfies::crossover(exploration.members[pa].genotype,
                                                     exploration.members[pb].genotype, rng,
                                                     cfg.joint_similarity));
  }
  for (std::size_t i = n_cross; i < size; ++i) {
    const Member& parent = exploration.members[rng.index(exploration.members.size())];
    offspring_genotypes.push_back(selfies::mutate(parent.genotype, rng));
  }
  std::vector<Member> offspring = make_members(std::move(offspring_genotypes), scorer);
  for (const Member& m : offspring) {
    archive.add(m.molecule, m.smiles, m.genotype, generation, m.score);
  }

  // pool with parents, dedup by canonical SMILES, keep the top `size`
  std::vector<Member> pool = std::move(exploration.members);
  std::set<std::string> pooled;
  for (const Member& m : pool) pooled.insert(m.smiles);
  for (Member& m : offspring) {
    if (pooled.insert(m.smiles).second) pool.push_back(std::move(m));
  }
  std::sort(pool.begin(), pool.end(), member_before);
  pool.erase(pool.begin() + static_cast<long>(size), pool.end());
  exploration.members = std::move(pool);

  // --- exploitation: mutants only, selected by similarity to their parent
  const std::size_t attempts = size * static_cast<std::size_t>(std::max(1, cfg.exploit_oversample));
  std::vector<SelfiesString> mutant_genotypes;
  std::vector<std::size_t> mutant_parent;
  mutant_genotypes.reserve(attempts);
  for (std::size_t i = 0; i < attempts; ++i) {
    const std::size_t p = rng.index(exploitation.members.size());
    mutant_parent.push_back(p);
    mutant_genotypes.push_back(selfies::mutate(exploitation.members[p].genotype, rng));
  }
  std::vector<Member> mutants = make_members(std::move(mutant_genotypes), scorer);
  std::vector<double> parent_similarity(mutants.size());
  parallel_for(mutants.size(), [&](std::size_t i) {
    parent_similarity[i] =
        molgraph::tanimoto(mutants[i].fp, exploitation.members[mutant_parent[i]].fp);
  });
  for (const Member& m : mutants) {
    archive.add(m.molecule, m.smiles, m.genotype, generation, m.score);
  }

  std::vector<std::size_t> order(mutants.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (parent_similarity[a] != parent_similarity[b]) {
      return parent_similarity[a] > parent_similarity[b];
    }
    if (mutants[a].score != mutants[b].score) return mutants[a].score > mutants[b].score;
    return mutants[a].smiles < mutants[b].smiles;
  });
  std::vector<Member> next;
  std::set<std::string> taken;
  for (const std::size_t i : order) {
    if (next.size() == size) break;
    if (taken.insert(mutants[i].smiles).second) next.push_back(std::move(mutants[i]));
  }
  if (next.size() < size) {  // dedup starved the pool; refill from parents
    std::vector<Member> parents = std::move(exploitation.members);
    std::sort(parents.begin(), parents.end(), member_before);
    for (Member& m : parents) {
      if (next.size() == size) break;
      if (taken.insert(m.smiles).second) next.push_back(std::move(m));
    }
  }
  exploitation.members = std::move(next);

  // --- exchange the top scorers of each population into the other
  const std::size_t k = static_cast<std::size_t>(cfg.exchange);
  const auto present = [](const Population& pop, const std::string& smiles) {
    for (const Member& m : pop.members) {
      if (m.smiles == smiles) return true;
    }
    return false;
  };
  std::vector<Member> to_exploit;
  for (const Member* m : top_members(exploration, k)) {
    if (!present(exploitation, m->smiles)) to_exploit.push_back(*m);
  }
  std::vector<Member> to_explore;
  for (const Member* m : top_members(exploitation, k)) {
    if (!present(exploration, m->smiles)) to_explore.push_back(*m);
  }
  const auto evict_and_insert = [](Population& pop, std::vector<Member>& incoming) {
    if (incoming.empty()) return;
    std::sort(pop.members.begin(), pop.members.end(), member_before);
    pop.members.erase(pop.members.end() - static_cast<long>(incoming.size()), pop.members.end());  // lowest scorers
    for (Member& m : incoming) pop.members.push_back(std::move(m));
  };
  evict_and_insert(exploration, to_explore);
  evict_and_insert(exploitation, to_exploit);
}

GenerationArchive run(std::span<const Molecule> seeds, const Scorer& scorer, const GAConfig& cfg) {
  GenerationArchive archive;
  Rng rng(derive_seed(cfg.seed, "ga"));
  auto [exploration, exploitation] = init_populations(seeds, scorer, cfg, rng);
  for (int g = 1; g <= cfg.generations; ++g) {
    step_generation(exploration, exploitation, scorer, cfg, rng, g, archive);
  }
  return archive;
}

}  // namespace alchemloop::generator
