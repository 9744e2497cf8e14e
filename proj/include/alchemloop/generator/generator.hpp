#pragma once

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alchemloop/molgraph/fingerprint.hpp"
#include "alchemloop/molgraph/molecule.hpp"
#include "alchemloop/rng.hpp"
#include "alchemloop/selfies/selfies.hpp"

namespace alchemloop::generator {

struct EmptySeed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GAConfig {
  int generations = 200;
  int population_size = 500;
  int exchange = 5;  // molecules swapped between the populations per step
  double crossover_fraction = 0.5;  // exploration offspring made by crossover
  // exploitation mutants generated per population slot before the
  // similarity-based selection (dedup eats some attempts)
  int exploit_oversample = 2;
  selfies::JointSimilarity joint_similarity = selfies::JointSimilarity::Min;
  std::uint64_t seed = 0;
};

struct Member {
  selfies::SelfiesString genotype;
  molgraph::Molecule molecule;
  std::string smiles;  // canonical
  double score = 0.0;
  molgraph::Fingerprint fp;
};

enum class PopulationKind { Exploration, Exploitation };

struct Population {
  PopulationKind kind = PopulationKind::Exploration;
  std::vector<Member> members;
};

using Scorer = std::function<double(const molgraph::Molecule&)>;

struct ArchiveEntry {
  std::string smiles;
  std::string selfies;
  int generation = 0;
  double score = 0.0;
};

// All distinct generated molecules (by canonical SMILES), insertion-ordered,
// filtered to neutral CHON. Serializes as JSON lines.
class GenerationArchive {
 public:
  // returns true if the molecule was new and admitted
  bool add(const molgraph::Molecule& m, const std::string& smiles,
           const selfies::SelfiesString& genotype, int generation, double score);
  bool contains(const std::string& smiles) const { return index_.count(smiles) > 0; }
  std::span<const ArchiveEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::string to_jsonl() const;
  static GenerationArchive from_jsonl(const std::string& text);

 private:
  std::vector<ArchiveEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

std::pair<Population, Population> init_populations(std::span<const molgraph::Molecule> seeds,
                                                   const Scorer& scorer, const GAConfig& cfg,
                                                   Rng& rng);

// One generation: exploration offspring by crossover+mutation pooled with
// parents and truncated by score; exploitation mutants selected by parent
// similarity; then the top `exchange` scorers of each population are copied
// into the other, evicting its lowest scorers. Every distinct offspring
// created this generation is recorded in the archive.
void step_generation(Population& exploration, Population& exploitation, const Scorer& scorer,
                     const GAConfig& cfg, Rng& rng, int generation, GenerationArchive& archive);

GenerationArchive run(std::span<const molgraph::Molecule> seeds, const Scorer& scorer,
                      const GAConfig& cfg);

}  // namespace alchemloop::generator
