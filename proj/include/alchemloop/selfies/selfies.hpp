#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alchemloop/molgraph/fingerprint.hpp"
#include "alchemloop/molgraph/molecule.hpp"
#include "alchemloop/rng.hpp"

namespace alchemloop::selfies {

// Closed CHON alphabet, 16 tokens. Token order defines the operand index
// used by branch/ring length encoding ([Branch2] reads two operand tokens
// interpreted as a base-16 number, and so on).
enum class Token : std::uint8_t {
  C = 0,        // [C]
  N = 1,        // [N]
  O = 2,        // [O]
  NPlus = 3,    // [N+1]
  OMinus = 4,   // [O-1]
  DoubleC = 5,  // [=C]
  TripleC = 6,  // [#C]
  DoubleN = 7,  // [=N]
  TripleN = 8,  // [#N]
  DoubleO = 9,  // [=O]
  Branch1 = 10,
  Branch2 = 11,
  Branch3 = 12,
  Ring1 = 13,
  Ring2 = 14,
  Ring3 = 15,
};

inline constexpr std::size_t kAlphabetSize = 16;

using SelfiesString = std::vector<Token>;

struct UnknownToken : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inexpressible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view token_text(Token t);
std::string to_string(const SelfiesString& s);
SelfiesString parse(std::string_view text);  // throws UnknownToken

// Total decoder: every token sequence yields a valid molecule. Bond orders
// are capped at the remaining valence of both endpoints, symbols that
// cannot act are skipped, and an empty derivation falls back to a single
// carbon ("C").
molgraph::Molecule decode(const SelfiesString& s);

// Inverse of decode up to isomorphism on the expressible set; throws
// Inexpressible when a ring span exceeds the operand range or a non-single
// bond cannot be oriented onto an alphabet token.
SelfiesString encode(const molgraph::Molecule& m);

// One uniformly chosen token edit (delete/insert/replace). A delete that
// would empty the string is re-rolled; a replace always picks a different
// token, so the output never equals the input.
SelfiesString mutate(const SelfiesString& s, Rng& rng);

enum class JointSimilarity { Min, Mean };

struct CrossoverTrace {
  SelfiesString child;
  std::vector<SelfiesString> path;  // path[0] == a, path.back() == b
  std::size_t best_index = 0;
  double best_similarity = 0.0;
};

// Token path from a to b: positions are aligned, pending edits applied one
// at a time in rng-shuffled order, every intermediate decoded, and the one
// maximizing the joint similarity to both parents returned (ties broken by
// earliest path index).
CrossoverTrace crossover_trace(const SelfiesString& a, const SelfiesString& b, Rng& rng,
                               JointSimilarity mode = JointSimilarity::Min);

SelfiesString crossover(const SelfiesString& a, const SelfiesString& b, Rng& rng,
                        JointSimilarity mode = JointSimilarity::Min);

double joint_similarity(const molgraph::Fingerprint& child, const molgraph::Fingerprint& pa,
                        const molgraph::Fingerprint& pb, JointSimilarity mode);

}  // namespace alchemloop::selfies
