#pragma once

#include <cstdint>
#include <vector>

#include "alchemloop/molgraph/molecule.hpp"

namespace alchemloop::molgraph {

// Hashed circular-substructure bit fingerprint (radius 0..2). Environment
// hashes are built from label-free atom invariants, so isomorphic molecules
// always produce identical fingerprints.
class Fingerprint {
 public:
  explicit Fingerprint(std::size_t bits = 1024);

  std::size_t bit_size() const { return bits_; }
  void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  std::size_t popcount() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t bits_;
  std::vector<std::uint64_t> words_;
};

Fingerprint fingerprint(const Molecule& m, std::size_t bits = 1024);

// |a & b| / |a | b|; two all-zero fingerprints compare as identical (1.0).
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace alchemloop::molgraph
