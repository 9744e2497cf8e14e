#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alchemloop/molgraph/molecule.hpp"

namespace alchemloop::molgraph {

inline constexpr std::size_t kDefaultFeatureDim = 32;

// Fixed descriptor slots; the remaining slots up to the feature dimension
// are zero padding. The list is frozen for a run and documented in the
// README.
//
//  0 heavy atom count
//  1 molecular weight
//  2-5 element fractions C, H, N, O (over all atoms incl. implicit H)
//  6-9 bond counts: N-O, N-N, C-N, O-O (any bond order)
//  10 ring count (cycle rank)
//  11 max ring size
//  12-15 heavy-degree histogram for degrees 1..4
//  16 H-bond donors (N/O atoms carrying at least one H)
//  17 H-bond acceptors (N/O atoms with non-positive formal charge)
//  18 charge-separation count (atoms with non-zero formal charge)
//  19 branching index (heavy atoms with heavy degree >= 3)
std::vector<double> raw_descriptors(const Molecule& m, std::size_t dim = kDefaultFeatureDim);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const { return mean.size(); }
};

// Per-feature mean/std over a dataset; computed once from the seed set and
// frozen for the run.
NormStats compute_norm_stats(std::span<const Molecule> dataset,
                             std::size_t dim = kDefaultFeatureDim);

struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// (raw - mean) / max(std, 1e-8), per feature.
FeatureVector featurize(const Molecule& m, const NormStats& stats);

double euclidean_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace alchemloop::molgraph
