#pragma once

#include <cstdint>
#include <string_view>

namespace alchemloop {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> engines and distributions so that streams are bit-identical
// across platforms and standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, n). Rejection sampling, no modulo bias. n must be >= 1.
  std::uint64_t below(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double unit();

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  bool chance(double p) { return unit() < p; }

 private:
  std::uint64_t state_;
};

// Child-seed derivation: mixes a phase label into the master seed so that
// adding a phase never perturbs the streams of existing ones. The label is
// hashed with FNV-1a and the result passed through the splitmix64 mixer.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

}  // namespace alchemloop
