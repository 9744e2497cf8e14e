#pragma once

// Shared test utilities. The isomorphism checker is an independent oracle:
// plain backtracking over label-compatible assignments, no use of the
// library's canonicalization.

#include <algorithm>
#include <numeric>
#include <vector>

#include "alchemloop/molgraph/molecule.hpp"
#include "alchemloop/rng.hpp"
#include "alchemloop/selfies/selfies.hpp"

namespace testutil {

using alchemloop::Rng;
using alchemloop::molgraph::Atom;
using alchemloop::molgraph::Bond;
using alchemloop::molgraph::Molecule;

inline alchemloop::selfies::SelfiesString random_selfies(Rng& rng, std::size_t max_len = 40) {
  const std::size_t len = 1 + rng.index(max_len);
  alchemloop::selfies::SelfiesString s;
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(static_cast<alchemloop::selfies::Token>(
        rng.below(alchemloop::selfies::kAlphabetSize)));
  }
  return s;
}

inline Molecule random_molecule(Rng& rng, std::size_t max_len = 40) {
  return alchemloop::selfies::decode(random_selfies(rng, max_len));
}

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
  return p;
}

// perm[i] = new index of old atom i.
inline Molecule relabel(const Molecule& m, const std::vector<std::size_t>& perm) {
  std::vector<Atom> atoms(m.atom_count());
  for (std::size_t i = 0; i < m.atom_count(); ++i) atoms[perm[i]] = m.atom(i);
  std::vector<Bond> bonds;
  for (const Bond& b : m.bonds()) {
    bonds.push_back({static_cast<std::uint16_t>(perm[b.a]),
                     static_cast<std::uint16_t>(perm[b.b]), b.order});
  }
  return Molecule(std::move(atoms), std::move(bonds));
}

namespace detail {

inline bool atoms_compatible(const Molecule& a, std::size_t i, const Molecule& b, std::size_t j) {
  return a.atom(i).element == b.atom(j).element &&
         a.atom(i).formal_charge == b.atom(j).formal_charge &&
         a.atom(i).implicit_h == b.atom(j).implicit_h && a.degree(i) == b.degree(j) &&
         a.bond_order_sum(i) == b.bond_order_sum(j);
}

inline bool extend_mapping(const Molecule& a, const Molecule& b, std::vector<int>& map_ab,
                           std::vector<int>& map_ba, std::size_t i) {
  if (i == a.atom_count()) return true;
  for (std::size_t j = 0; j < b.atom_count(); ++j) {
    if (map_ba[j] >= 0) continue;
    if (!atoms_compatible(a, i, b, j)) continue;
    bool ok = true;
    for (const auto& [v, order] : a.neighbors(i)) {
      if (v < i) {  // mapped already (we map in index order)
        const int w = map_ab[v];
        bool found = false;
        for (const auto& [u, o2] : b.neighbors(j)) {
          if (static_cast<int>(u) == w && o2 == order) found = true;
        }
        if (!found) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    map_ab[i] = static_cast<int>(j);
    map_ba[j] = static_cast<int>(i);
    if (extend_mapping(a, b, map_ab, map_ba, i + 1)) return true;
    map_ab[i] = -1;
    map_ba[j] = -1;
  }
  return false;
}

}  // namespace detail

inline bool is_isomorphic(const Molecule& a, const Molecule& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  std::vector<int> map_ab(a.atom_count(), -1);
  std::vector<int> map_ba(b.atom_count(), -1);
  return detail::extend_mapping(a, b, map_ab, map_ba, 0);
}

}  // namespace testutil
