#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "alchemloop/molgraph/molecule.hpp"

namespace alchemloop::molgraph {

struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedFeature : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the supported SMILES subset: atoms C, N, O (bracket forms [N+],
// [O-] for charge), bond symbols - = #, branches ( ), single-digit ring
// closures 0-9. Implicit hydrogens are filled on every atom (including
// bracket atoms) to satisfy the fixed valence table. Aromatic lowercase,
// stereo markers, isotopes, other elements and multi-fragment dots are
// rejected with UnsupportedFeature.
Molecule parse_smiles(std::string_view text);

// Canonical writer: two isomorphic molecules produce byte-identical
// strings. Canonical atom ranks come from iterative invariant refinement
// with exhaustive tie-breaking (the output is the lexicographically
// smallest string over all tie-break choices).
std::string write_smiles(const Molecule& m);

}  // namespace alchemloop::molgraph
