#include "alchemloop/molgraph/molecule.hpp"

#include <algorithm>

namespace alchemloop::molgraph {

const char* element_symbol(Element e) {
  switch (e) {
    case Element::C: return "C";
    case Element::H: return "H";
    case Element::N: return "N";
    case Element::O: return "O";
  }
  return "?";
}

double atomic_weight(Element e) {
  switch (e) {
    case Element::C: return 12.011;
    case Element::H: return 1.008;
    case Element::N: return 14.007;
    case Element::O: return 15.999;
  }
  return 0.0;
}

bool valence_defined(Element e, int formal_charge) {
  if (formal_charge == 0) return true;
  if (e == Element::N && formal_charge == 1) return true;
  if (e == Element::O && formal_charge == -1) return true;
  return false;
}

int valence(Element e, int formal_charge) {
  if (formal_charge == 0) {
    switch (e) {
      case Element::C: return 4;
      case Element::H: return 1;
      case Element::N: return 3;
      case Element::O: return 2;
    }
  }
  if (e == Element::N && formal_charge == 1) return 4;
  if (e == Element::O && formal_charge == -1) return 1;
  throw ValenceError(std::string("no valence defined for ") + element_symbol(e) +
                     " with charge " + std::to_string(formal_charge));
}

Molecule::Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  if (atoms_.empty()) throw std::invalid_argument("molecule must have at least one atom");
  const std::size_t n = atoms_.size();
  adjacency_.resize(n);
  for (const Bond& b : bonds_) {
    if (b.a >= n || b.b >= n) throw std::invalid_argument("bond atom index out of range");
    if (b.a == b.b) throw std::invalid_argument("self-loop bond");
    if (b.order < 1 || b.order > 3) throw std::invalid_argument("bond order must be 1..3");
    if (has_bond(b.a, b.b)) throw std::invalid_argument("duplicate bond between atom pair");
    adjacency_[b.a].emplace_back(b.b, b.order);
    adjacency_[b.b].emplace_back(b.a, b.order);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = atoms_[i];
    const int v = valence(a.element, a.formal_charge);
    const int used = bond_order_sum(i);
    if (used + static_cast<int>(a.implicit_h) != v) {
      throw ValenceError(std::string("atom ") + std::to_string(i) + " (" +
                         element_symbol(a.element) + "): bond order sum " +
                         std::to_string(used) + " + " + std::to_string(a.implicit_h) +
                         "H != valence " + std::to_string(v));
    }
  }

  // Connectivity (BFS from atom 0).
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t u = queue.back();
    queue.pop_back();
    for (const auto& [v, order] : adjacency_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  if (reached != n) throw std::invalid_argument("molecule graph is disconnected");
}

int Molecule::bond_order_sum(std::size_t i) const {
  int s = 0;
  for (const auto& [v, order] : adjacency_[i]) s += order;
  return s;
}

int Molecule::net_formal_charge() const {
  int s = 0;
  for (const Atom& a : atoms_) s += a.formal_charge;
  return s;
}

std::size_t Molecule::heavy_atom_count() const {
  std::size_t s = 0;
  for (const Atom& a : atoms_) s += (a.element != Element::H);
  return s;
}

std::size_t Molecule::implicit_h_total() const {
  std::size_t s = 0;
  for (const Atom& a : atoms_) s += a.implicit_h;
  return s;
}

double Molecule::molecular_weight() const {
  // count-based so the result is independent of atom ordering (no
  // order-sensitive floating-point accumulation)
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const Atom& a : atoms_) {
    counts[static_cast<int>(a.element)] += 1;
    counts[static_cast<int>(Element::H)] += a.implicit_h;
  }
  double s = 0.0;
  for (int e = 0; e < 4; ++e) {
    s += static_cast<double>(counts[e]) * atomic_weight(static_cast<Element>(e));
  }
  return s;
}

bool Molecule::has_bond(std::size_t a, std::size_t b) const {
  for (const auto& [v, order] : adjacency_[a]) {
    if (v == b) return true;
  }
  return false;
}

}  // namespace alchemloop::molgraph
