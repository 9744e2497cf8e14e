#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace alchemloop::molgraph {

enum class Element : std::uint8_t { C = 0, H = 1, N = 2, O = 3 };

struct ValenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* element_symbol(Element e);
double atomic_weight(Element e);

// Standard valence adjusted by formal charge: C 4, H 1, N 3, O 2;
// +1 on N gives 4, -1 on O gives 1. Anything else is unsupported.
int valence(Element e, int formal_charge);
bool valence_defined(Element e, int formal_charge);

struct Atom {
  Element element = Element::C;
  std::int8_t formal_charge = 0;
  std::uint8_t implicit_h = 0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  std::uint16_t a = 0;
  std::uint16_t b = 0;
  std::uint8_t order = 1;

  friend bool operator==(const Bond&, const Bond&) = default;
};

// Attributed molecular graph in Kekulé form. Immutable once constructed;
// the constructor enforces valence closure, connectivity, index ranges,
// and simple-graph structure, so every Molecule in the system is valid.
class Molecule {
 public:
  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds);

  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  // Neighbors of atom i as (atom index, bond order), sorted by atom index.
  std::span<const std::pair<std::uint16_t, std::uint8_t>> neighbors(std::size_t i) const {
    return adjacency_[i];
  }

  int degree(std::size_t i) const { return static_cast<int>(adjacency_[i].size()); }
  int bond_order_sum(std::size_t i) const;
  int net_formal_charge() const;
  std::size_t heavy_atom_count() const;
  std::size_t implicit_h_total() const;
  double molecular_weight() const;  // includes implicit hydrogens
  bool has_bond(std::size_t a, std::size_t b) const;

  friend bool operator==(const Molecule&, const Molecule&) = default;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<std::uint16_t, std::uint8_t>>> adjacency_;
};

}  // namespace alchemloop::molgraph
