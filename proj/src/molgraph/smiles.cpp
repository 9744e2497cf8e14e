#include "alchemloop/molgraph/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>

namespace alchemloop::molgraph {

namespace {

struct PendingAtom {
  Element element;
  int charge = 0;
};

struct RingSlot {
  std::size_t atom;
  int order;  // 0 = unspecified on the opening side
};

struct ParseState {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<int> order_used;  // running bond order sum per atom
};

void add_bond(ParseState& st, std::size_t a, std::size_t b, int order, std::string_view text) {
  if (a == b) throw SyntaxError("ring bond closes onto the same atom: " + std::string(text));
  for (const Bond& bd : st.bonds) {
    if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) {
      throw SyntaxError("duplicate bond between atom pair: " + std::string(text));
    }
  }
  st.bonds.push_back({static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b),
                      static_cast<std::uint8_t>(order)});
  st.order_used[a] += order;
  st.order_used[b] += order;
}

Element element_from_char(char c, std::string_view text) {
  switch (c) {
    case 'C': return Element::C;
    case 'N': return Element::N;
    case 'O': return Element::O;
    case 'c':
    case 'n':
    case 'o':
      throw UnsupportedFeature("aromatic lowercase atoms are not supported: " + std::string(text));
    default:
      throw UnsupportedFeature(std::string("unsupported element '") + c + "' in: " + std::string(text));
  }
}

}  // namespace

Molecule parse_smiles(std::string_view text) {
  ParseState st;
  std::vector<std::size_t> branch_stack;
  std::map<char, RingSlot> open_rings;
  std::optional<std::size_t> prev_atom;
  int pending_order = 0;  // 0 = no explicit bond symbol pending

  std::size_t i = 0;
  const auto fail = [&](const std::string& msg) -> void {
    throw SyntaxError(msg + " at position " + std::to_string(i) + " in: " + std::string(text));
  };

  const auto place_atom = [&](Element e, int charge) {
    if (!valence_defined(e, charge)) {
      throw UnsupportedFeature("unsupported charge state in: " + std::string(text));
    }
    st.atoms.push_back({e, static_cast<std::int8_t>(charge), 0});
    st.order_used.push_back(0);
    const std::size_t idx = st.atoms.size() - 1;
    if (prev_atom) {
      add_bond(st, *prev_atom, idx, pending_order == 0 ? 1 : pending_order, text);
    } else if (pending_order != 0) {
      fail("bond symbol before first atom");
    }
    pending_order = 0;
    prev_atom = idx;
  };

  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) fail("whitespace inside SMILES");
    switch (c) {
      case '-': case '=': case '#': {
        if (pending_order != 0) fail("two consecutive bond symbols");
        pending_order = (c == '-') ? 1 : (c == '=') ? 2 : 3;
        ++i;
        break;
      }
      case '(': {
        if (!prev_atom) fail("branch before any atom");
        if (pending_order != 0) fail("bond symbol before branch open");
        branch_stack.push_back(*prev_atom);
        ++i;
        break;
      }
      case ')': {
        if (branch_stack.empty()) fail("unmatched ')'");
        if (pending_order != 0) fail("dangling bond symbol before ')'");
        prev_atom = branch_stack.back();
        branch_stack.pop_back();
        ++i;
        break;
      }
      case '[': {
        const std::size_t close = text.find(']', i);
        if (close == std::string_view::npos) fail("unclosed '['");
        const std::string_view body = text.substr(i + 1, close - i - 1);
        if (body.empty()) fail("empty bracket atom");
        std::size_t j = 0;
        const Element e = element_from_char(body[j], text);
        ++j;
        int charge = 0;
        if (j < body.size() && (body[j] == '+' || body[j] == '-')) {
          const int sign = body[j] == '+' ? 1 : -1;
          ++j;
          int magnitude = 1;
          if (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) {
            magnitude = body[j] - '0';
            ++j;
          }
          charge = sign * magnitude;
        }
        if (j != body.size()) {
          throw UnsupportedFeature("unsupported bracket atom [" + std::string(body) +
                                   "] in: " + std::string(text));
        }
        place_atom(e, charge);
        i = close + 1;
        break;
      }
      case '%':
        throw UnsupportedFeature("two-digit ring closures are not supported: " + std::string(text));
      case '.':
        throw UnsupportedFeature("multi-fragment SMILES are not supported: " + std::string(text));
      case '/': case '\\': case '@':
        throw UnsupportedFeature("stereochemistry is not supported: " + std::string(text));
      default: {
        if (std::isdigit(static_cast<unsigned char>(c))) {
          if (!prev_atom) fail("ring closure before any atom");
          const auto it = open_rings.find(c);
          if (it == open_rings.end()) {
            open_rings.emplace(c, RingSlot{*prev_atom, pending_order});
          } else {
            int order = 1;
            if (it->second.order != 0 && pending_order != 0) {
              if (it->second.order != pending_order) fail("conflicting ring bond orders");
              order = pending_order;
            } else if (it->second.order != 0) {
              order = it->second.order;
            } else if (pending_order != 0) {
              order = pending_order;
            }
            add_bond(st, it->second.atom, *prev_atom, order, text);
            open_rings.erase(it);
          }
          pending_order = 0;
          ++i;
          break;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
          place_atom(element_from_char(c, text), 0);
          ++i;
          break;
        }
        fail(std::string("unexpected character '") + c + "'");
      }
    }
  }

  if (st.atoms.empty()) throw SyntaxError("empty SMILES string");
  if (!branch_stack.empty()) throw SyntaxError("unclosed branch in: " + std::string(text));
  if (!open_rings.empty()) throw SyntaxError("unclosed ring bond in: " + std::string(text));
  if (pending_order != 0) throw SyntaxError("dangling bond symbol in: " + std::string(text));

  // Fill implicit hydrogens; the fixed valence table leaves no choice.
  for (std::size_t a = 0; a < st.atoms.size(); ++a) {
    const int v = valence(st.atoms[a].element, st.atoms[a].formal_charge);
    const int spare = v - st.order_used[a];
    if (spare < 0) {
      throw ValenceError("atom " + std::to_string(a) + " exceeds valence in: " + std::string(text));
    }
    st.atoms[a].implicit_h = static_cast<std::uint8_t>(spare);
  }
  return Molecule(std::move(st.atoms), std::move(st.bonds));
}

// ---------------------------------------------------------------------------
// Canonical writer
// ---------------------------------------------------------------------------

namespace {

// Atom invariant refinement: start from local invariants, then iterate
// "rank + sorted (bond order, neighbor rank) signature" until the number
// of classes stops growing.
using Ranks = std::vector<int>;

Ranks refine(const Molecule& m, const Ranks& initial) {
  const std::size_t n = m.atom_count();
  Ranks ranks = initial;
  auto count_classes = [&](const Ranks& r) {
    std::vector<int> s(r);
    std::sort(s.begin(), s.end());
    return static_cast<int>(std::unique(s.begin(), s.end()) - s.begin());
  };
  int classes = count_classes(ranks);
  for (;;) {
    std::vector<std::pair<std::vector<int>, std::size_t>> sigs(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> sig;
      sig.push_back(ranks[i]);
      std::vector<std::pair<int, int>> nb;
      for (const auto& [v, order] : m.neighbors(i)) nb.emplace_back(order, ranks[v]);
      std::sort(nb.begin(), nb.end());
      for (const auto& [order, r] : nb) {
        sig.push_back(order);
        sig.push_back(r);
      }
      sigs[i] = {std::move(sig), i};
    }
    std::vector<std::pair<std::vector<int>, std::size_t>> sorted = sigs;
    std::sort(sorted.begin(), sorted.end());
    Ranks next(n);
    int rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && sorted[k].first != sorted[k - 1].first) ++rank;
      next[sorted[k].second] = rank;
    }
    const int next_classes = count_classes(next);
    if (next_classes == classes) return next;
    ranks = std::move(next);
    classes = next_classes;
  }
}

Ranks initial_ranks(const Molecule& m) {
  const std::size_t n = m.atom_count();
  std::vector<std::pair<std::vector<int>, std::size_t>> sigs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = m.atom(i);
    sigs[i] = {{static_cast<int>(a.element), a.formal_charge, m.degree(i),
                m.bond_order_sum(i), static_cast<int>(a.implicit_h)},
               i};
  }
  auto sorted = sigs;
  std::sort(sorted.begin(), sorted.end());
  Ranks ranks(n);
  int rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && sorted[k].first != sorted[k - 1].first) ++rank;
    ranks[sorted[k].second] = rank;
  }
  return ranks;
}

const char* bond_symbol(int order) {
  switch (order) {
    case 2: return "=";
    case 3: return "#";
    default: return "";
  }
}

void write_atom_token(std::string& out, const Atom& a) {
  if (a.formal_charge == 0) {
    out += element_symbol(a.element);
  } else {
    out += '[';
    out += element_symbol(a.element);
    out += a.formal_charge > 0 ? '+' : '-';
    out += ']';
  }
}

// Emits a SMILES string for the molecule using a fixed atom ranking:
// DFS from the rank-0 atom, neighbors in increasing rank, ring-closure
// digits allocated smallest-free-first and reused after closing.
std::string write_with_ranks(const Molecule& m, const Ranks& ranks) {
  const std::size_t n = m.atom_count();
  const std::size_t root =
      static_cast<std::size_t>(std::min_element(ranks.begin(), ranks.end()) - ranks.begin());

  // Identify tree vs ring bonds with an iterative DFS in rank order.
  std::vector<int> parent(n, -1);
  std::vector<char> visited(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  // ring closure bonds as (first endpoint in DFS order, second endpoint, order)
  struct RingBond {
    std::size_t opener, closer;
    int order;
  };
  std::vector<RingBond> ring_bonds;
  std::vector<std::size_t> order_seen;  // DFS pre-order position per atom
  order_seen.assign(n, 0);

  visited[root] = 1;
  std::size_t counter = 0;
  std::vector<std::pair<std::size_t, std::size_t>> seen_ring_pairs;
  const std::function<void(std::size_t)> dfs = [&](std::size_t u) {
    order_seen[u] = counter++;
    std::vector<std::pair<int, std::size_t>> nbrs;
    for (const auto& [v, order] : m.neighbors(u)) nbrs.emplace_back(ranks[v], v);
    std::sort(nbrs.begin(), nbrs.end());
    for (const auto& [r, v] : nbrs) {
      if (!visited[v]) {
        visited[v] = 1;
        parent[v] = static_cast<int>(u);
        children[u].push_back(v);
        dfs(v);
      } else if (static_cast<int>(v) != parent[u]) {
        const std::size_t w = static_cast<std::size_t>(v);
        const std::pair<std::size_t, std::size_t> pk{std::min(u, w), std::max(u, w)};
        if (std::find(seen_ring_pairs.begin(), seen_ring_pairs.end(), pk) ==
            seen_ring_pairs.end()) {
          seen_ring_pairs.push_back(pk);
          int order = 1;
          for (const auto& [w, o] : m.neighbors(u)) {
            if (w == v) order = o;
          }
          ring_bonds.push_back({v, u, order});  // v was visited first
        }
      }
    }
  };
  dfs(root);

  // Assign ring digits: a digit is busy between its opener's and closer's
  // emission. Allocation order follows the emission position of openers.
  std::sort(ring_bonds.begin(), ring_bonds.end(), [&](const RingBond& x, const RingBond& y) {
    return std::pair(order_seen[x.opener], order_seen[x.closer]) <
           std::pair(order_seen[y.opener], order_seen[y.closer]);
  });
  std::vector<std::vector<std::pair<char, int>>> digits_at(n);  // (digit, order-or-0) per atom
  std::vector<char> busy(10, 0);
  // Events per atom position: openings then closings are resolved atom by atom
  // in emission order.
  std::vector<std::size_t> emit_order(n);
  for (std::size_t i = 0; i < n; ++i) emit_order[order_seen[i]] = i;
  struct Open {
    std::size_t closer;
    char digit;
  };
  std::vector<Open> open_now;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t u = emit_order[pos];
    // close digits ending at u (in digit allocation order)
    for (auto it = open_now.begin(); it != open_now.end();) {
      if (it->closer == u) {
        digits_at[u].emplace_back(it->digit, 0);
        busy[it->digit - '0'] = 0;
        it = open_now.erase(it);
      } else {
        ++it;
      }
    }
    // open digits starting at u
    for (const RingBond& rb : ring_bonds) {
      if (rb.opener == u) {
        int d = 0;
        while (d < 10 && busy[d]) ++d;
        if (d == 10) {
          throw UnsupportedFeature("more than 10 simultaneously open ring closures");
        }
        busy[d] = 1;
        digits_at[u].emplace_back(static_cast<char>('0' + d), rb.order);
        open_now.push_back({rb.closer, static_cast<char>('0' + d)});
      }
    }
  }

  std::string out;
  const std::function<void(std::size_t, int)> emit = [&](std::size_t u, int in_order) {
    out += bond_symbol(in_order);
    write_atom_token(out, m.atom(u));
    for (const auto& [digit, order] : digits_at[u]) {
      out += bond_symbol(order);  // order carried on the opening side only
      out += digit;
    }
    const auto& kids = children[u];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int order = 1;
      for (const auto& [w, o] : m.neighbors(u)) {
        if (w == kids[k]) order = o;
      }
      const bool last = (k + 1 == kids.size());
      if (!last) out += '(';
      emit(kids[k], order);
      if (!last) out += ')';
    }
  };
  emit(root, 0);
  return out;
}

// Full canonicalization: refine, then break residual ties by promoting each
// member of the smallest tied class in turn and taking the lexicographically
// smallest emitted string. Exhaustive, so it is a true function of the
// isomorphism class.
std::string canonical_string(const Molecule& m, Ranks ranks) {
  ranks = refine(m, ranks);
  const std::size_t n = m.atom_count();
  // find smallest rank that is shared
  std::vector<int> count(n, 0);
  for (const int r : ranks) ++count[static_cast<std::size_t>(r)];
  int tied_rank = -1;
  for (std::size_t r = 0; r < n; ++r) {
    if (count[r] > 1) {
      tied_rank = static_cast<int>(r);
      break;
    }
  }
  if (tied_rank < 0) return write_with_ranks(m, ranks);

  std::string best;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranks[i] != tied_rank) continue;
    Ranks promoted = ranks;
    // Give atom i a fresh rank below its classmates; double ranks first so
    // the promotion cannot collide with an existing class.
    for (int& r : promoted) r *= 2;
    promoted[i] -= 1;
    std::string s = canonical_string(m, promoted);
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

}  // namespace

std::string write_smiles(const Molecule& m) {
  return canonical_string(m, initial_ranks(m));
}

}  // namespace alchemloop::molgraph
