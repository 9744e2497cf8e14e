#include "alchemloop/selfies/selfies.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <optional>

namespace alchemloop::selfies {

namespace {

using molgraph::Atom;
using molgraph::Bond;
using molgraph::Element;
using molgraph::Molecule;

constexpr std::array<std::string_view, kAlphabetSize> kTokenText = {
    "[C]", "[N]", "[O]", "[N+1]", "[O-1]", "[=C]", "[#C]", "[=N]", "[#N]", "[=O]",
    "[Branch1]", "[Branch2]", "[Branch3]", "[Ring1]", "[Ring2]", "[Ring3]",
};

struct AtomTokenInfo {
  Element element;
  int charge;
  int bond_order;  // intrinsic order of the bond into this atom
};

bool is_atom_token(Token t) { return static_cast<int>(t) <= static_cast<int>(Token::DoubleO); }

AtomTokenInfo atom_token_info(Token t) {
  switch (t) {
    case Token::C: return {Element::C, 0, 1};
    case Token::N: return {Element::N, 0, 1};
    case Token::O: return {Element::O, 0, 1};
    case Token::NPlus: return {Element::N, 1, 1};
    case Token::OMinus: return {Element::O, -1, 1};
    case Token::DoubleC: return {Element::C, 0, 2};
    case Token::TripleC: return {Element::C, 0, 3};
    case Token::DoubleN: return {Element::N, 0, 2};
    case Token::TripleN: return {Element::N, 0, 3};
    case Token::DoubleO: return {Element::O, 0, 2};
    default: throw std::logic_error("not an atom token");
  }
}

int operand_width(Token t) {
  switch (t) {
    case Token::Branch1: case Token::Ring1: return 1;
    case Token::Branch2: case Token::Ring2: return 2;
    case Token::Branch3: case Token::Ring3: return 3;
    default: return 0;
  }
}

bool is_branch_token(Token t) {
  return t == Token::Branch1 || t == Token::Branch2 || t == Token::Branch3;
}

}  // namespace

std::string_view token_text(Token t) { return kTokenText[static_cast<std::size_t>(t)]; }

std::string to_string(const SelfiesString& s) {
  std::string out;
  for (const Token t : s) out += token_text(t);
  return out;
}

SelfiesString parse(std::string_view text) {
  SelfiesString s;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[') throw UnknownToken("expected '[' at position " + std::to_string(i));
    const std::size_t close = text.find(']', i);
    if (close == std::string_view::npos) throw UnknownToken("unterminated token in: " + std::string(text));
    const std::string_view tok = text.substr(i, close - i + 1);
    bool found = false;
    for (std::size_t k = 0; k < kAlphabetSize; ++k) {
      if (kTokenText[k] == tok) {
        s.push_back(static_cast<Token>(k));
        found = true;
        break;
      }
    }
    if (!found) throw UnknownToken("unknown token " + std::string(tok));
    i = close + 1;
  }
  return s;
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

namespace {

struct Derivation {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<int> rem;  // remaining valence per atom

  bool has_bond(std::size_t a, std::size_t b) const {
    for (const Bond& bd : bonds) {
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return true;
    }
    return false;
  }

  std::size_t place(Element e, int charge) {
    atoms.push_back({e, static_cast<std::int8_t>(charge), 0});
    rem.push_back(molgraph::valence(e, charge));
    return atoms.size() - 1;
  }

  void bond(std::size_t a, std::size_t b, int order) {
    bonds.push_back({static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b),
                     static_cast<std::uint8_t>(order)});
    rem[a] -= order;
    rem[b] -= order;
  }
};

// Reads up to `width` operand tokens as a base-16 number. Returns false if
// the span ends before all operands are available.
bool read_operand(const Token* toks, std::size_t& pos, std::size_t end, int width, long& q) {
  q = 0;
  for (int k = 0; k < width; ++k) {
    if (pos >= end) return false;
    q = q * 16 + static_cast<long>(toks[pos]);
    ++pos;
  }
  return true;
}

// Derives tokens [pos, end) with `attach` as the current attachment atom
// (-1 when starting the main chain). Atom indices double as placement
// positions because atoms are only ever appended.
void derive_span(const Token* toks, std::size_t pos, std::size_t end, long attach, Derivation& d) {
  long current = attach;
  while (pos < end) {
    const Token t = toks[pos];
    if (is_atom_token(t)) {
      ++pos;
      const AtomTokenInfo info = atom_token_info(t);
      const int val = molgraph::valence(info.element, info.charge);
      if (current < 0) {
        current = static_cast<long>(d.place(info.element, info.charge));
        continue;
      }
      if (d.rem[static_cast<std::size_t>(current)] == 0) continue;  // cannot act
      const int order = std::min({info.bond_order, d.rem[static_cast<std::size_t>(current)], val});
      const std::size_t idx = d.place(info.element, info.charge);
      d.bond(static_cast<std::size_t>(current), idx, order);
      current = static_cast<long>(idx);
    } else if (is_branch_token(t)) {
      const int width = operand_width(t);
      ++pos;
      long q = 0;
      if (!read_operand(toks, pos, end, width, q)) return;
      const std::size_t len = static_cast<std::size_t>(q) + 1;
      if (current >= 0 && d.rem[static_cast<std::size_t>(current)] >= 2) {
        const std::size_t bend = std::min(pos + len, end);
        derive_span(toks, pos, bend, current, d);
        pos = bend;
      }
      // else: the branch cannot act; its would-be body continues the chain
    } else {  // ring token
      const int width = operand_width(t);
      ++pos;
      long q = 0;
      if (!read_operand(toks, pos, end, width, q)) return;
      if (current < 0) continue;
      long target = current - (q + 1);
      if (target < 0) target = 0;
      if (target == current) continue;
      const auto c = static_cast<std::size_t>(current);
      const auto g = static_cast<std::size_t>(target);
      if (d.rem[c] < 1 || d.rem[g] < 1) continue;
      if (d.has_bond(c, g)) continue;
      d.bond(c, g, 1);
    }
  }
}

}  // namespace

Molecule decode(const SelfiesString& s) {
  Derivation d;
  derive_span(s.data(), 0, s.size(), -1, d);
  if (d.atoms.empty()) {
    return Molecule({{Element::C, 0, 4}}, {});  // empty derivation decodes to "C"
  }
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    d.atoms[i].implicit_h = static_cast<std::uint8_t>(d.rem[i]);
  }
  return Molecule(std::move(d.atoms), std::move(d.bonds));
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

Token atom_token_for(const Atom& a, int in_order) {
  if (in_order <= 1) {
    if (a.formal_charge == 0) {
      switch (a.element) {
        case Element::C: return Token::C;
        case Element::N: return Token::N;
        case Element::O: return Token::O;
        default: break;
      }
    } else if (a.element == Element::N && a.formal_charge == 1) {
      return Token::NPlus;
    } else if (a.element == Element::O && a.formal_charge == -1) {
      return Token::OMinus;
    }
  } else if (in_order == 2 && a.formal_charge == 0) {
    switch (a.element) {
      case Element::C: return Token::DoubleC;
      case Element::N: return Token::DoubleN;
      case Element::O: return Token::DoubleO;
      default: break;
    }
  } else if (in_order == 3 && a.formal_charge == 0) {
    if (a.element == Element::C) return Token::TripleC;
    if (a.element == Element::N) return Token::TripleN;
  }
  throw Inexpressible("no alphabet token for this atom/bond combination");
}

void append_length_coded(SelfiesString& out, Token one, Token two, Token three, long q) {
  int width;
  Token head;
  if (q < 16) {
    width = 1;
    head = one;
  } else if (q < 256) {
    width = 2;
    head = two;
  } else if (q < 4096) {
    width = 3;
    head = three;
  } else {
    throw Inexpressible("length operand exceeds the encodable range");
  }
  out.push_back(head);
  for (int k = width - 1; k >= 0; --k) {
    out.push_back(static_cast<Token>((q >> (4 * k)) & 0xF));
  }
}

struct Encoder {
  const Molecule& m;
  std::vector<std::vector<std::pair<std::size_t, int>>> tree;  // (neighbor, order)
  std::vector<std::vector<std::size_t>> ring_partner;          // ring-bond partners per atom
  std::vector<long> pos;
  long counter = 0;

  explicit Encoder(const Molecule& mol) : m(mol) {}

  void emit(std::size_t u, long parent, int in_order, SelfiesString& out) {
    out.push_back(atom_token_for(m.atom(u), in_order));
    pos[u] = counter++;
    for (const std::size_t w : ring_partner[u]) {
      if (pos[w] < 0) continue;  // w not placed yet; emitted from the other side
      const long q = (pos[u] - pos[w]) - 1;
      append_length_coded(out, Token::Ring1, Token::Ring2, Token::Ring3, q);
    }
    std::vector<std::pair<std::size_t, int>> kids;
    for (const auto& [v, order] : tree[u]) {
      if (static_cast<long>(v) != parent) kids.emplace_back(v, order);
    }
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool last = (k + 1 == kids.size());
      if (last) {
        emit(kids[k].first, static_cast<long>(u), kids[k].second, out);
      } else {
        SelfiesString sub;
        emit(kids[k].first, static_cast<long>(u), kids[k].second, sub);
        append_length_coded(out, Token::Branch1, Token::Branch2, Token::Branch3,
                            static_cast<long>(sub.size()) - 1);
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
  }
};

}  // namespace

SelfiesString encode(const Molecule& m) {
  const std::size_t n = m.atom_count();
  const auto bonds = m.bonds();

  // Non-single bonds must be tree edges (ring closures are always single),
  // so they have to be acyclic.
  Dsu dsu(n);
  std::vector<char> in_tree(bonds.size(), 0);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if (bonds[i].order > 1) {
      if (!dsu.join(bonds[i].a, bonds[i].b)) {
        throw Inexpressible("non-single bonds form a cycle");
      }
      in_tree[i] = 1;
    }
  }
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if (bonds[i].order == 1 && dsu.join(bonds[i].a, bonds[i].b)) in_tree[i] = 1;
  }

  Encoder enc(m);
  enc.tree.resize(n);
  enc.ring_partner.resize(n);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if (in_tree[i]) {
      enc.tree[bonds[i].a].emplace_back(bonds[i].b, bonds[i].order);
      enc.tree[bonds[i].b].emplace_back(bonds[i].a, bonds[i].order);
    } else {
      enc.ring_partner[bonds[i].a].push_back(bonds[i].b);
      enc.ring_partner[bonds[i].b].push_back(bonds[i].a);
    }
  }
  for (auto& adj : enc.tree) std::sort(adj.begin(), adj.end());
  for (auto& rp : enc.ring_partner) std::sort(rp.begin(), rp.end());

  // The root determines bond orientations; charged atoms have no
  // double/triple-bond tokens, so some roots are infeasible. Try them all.
  std::string first_error;
  for (std::size_t root = 0; root < n; ++root) {
    enc.pos.assign(n, -1);
    enc.counter = 0;
    SelfiesString out;
    try {
      enc.emit(root, -1, 0, out);
      return out;
    } catch (const Inexpressible& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  throw Inexpressible(first_error.empty() ? "no feasible encoding" : first_error);
}

// ---------------------------------------------------------------------------
// variation operators
// ---------------------------------------------------------------------------

SelfiesString mutate(const SelfiesString& s, Rng& rng) {
  if (s.empty()) throw std::invalid_argument("cannot mutate an empty string");
  for (;;) {
    const std::uint64_t kind = rng.below(3);
    if (kind == 0) {
      if (s.size() == 1) continue;  // deletion of the last token is re-rolled
      SelfiesString out = s;
      out.erase(out.begin() + static_cast<long>(rng.index(out.size())));
      return out;
    }
    if (kind == 1) {
      SelfiesString out = s;
      const std::size_t at = rng.index(out.size() + 1);
      out.insert(out.begin() + static_cast<long>(at),
                 static_cast<Token>(rng.below(kAlphabetSize)));
      return out;
    }
    SelfiesString out = s;
    const std::size_t at = rng.index(out.size());
    auto pick = static_cast<std::uint8_t>(rng.below(kAlphabetSize - 1));
    if (pick >= static_cast<std::uint8_t>(out[at])) ++pick;  // never the same token
    out[at] = static_cast<Token>(pick);
    return out;
  }
}

double joint_similarity(const molgraph::Fingerprint& child, const molgraph::Fingerprint& pa,
                        const molgraph::Fingerprint& pb, JointSimilarity mode) {
  const double sa = molgraph::tanimoto(child, pa);
  const double sb = molgraph::tanimoto(child, pb);
  return mode == JointSimilarity::Min ? std::min(sa, sb) : 0.5 * (sa + sb);
}

CrossoverTrace crossover_trace(const SelfiesString& a, const SelfiesString& b, Rng& rng,
                               JointSimilarity mode) {
  constexpr Token kGap = static_cast<Token>(0xFF);
  const std::size_t len = std::max(a.size(), b.size());
  std::vector<Token> cur(len, kGap);
  std::vector<Token> target(len, kGap);
  std::copy(a.begin(), a.end(), cur.begin());
  std::copy(b.begin(), b.end(), target.begin());

  std::vector<std::size_t> diffs;
  for (std::size_t i = 0; i < len; ++i) {
    if (cur[i] != target[i]) diffs.push_back(i);
  }
  for (std::size_t i = diffs.size(); i > 1; --i) {  // Fisher-Yates
    std::swap(diffs[i - 1], diffs[rng.index(i)]);
  }

  const auto materialize = [&](const std::vector<Token>& slots) {
    SelfiesString s;
    for (const Token t : slots) {
      if (t != kGap) s.push_back(t);
    }
    return s;
  };

  CrossoverTrace trace;
  trace.path.push_back(materialize(cur));
  for (const std::size_t d : diffs) {
    cur[d] = target[d];
    trace.path.push_back(materialize(cur));
  }

  const molgraph::Fingerprint fa = molgraph::fingerprint(decode(trace.path.front()));
  const molgraph::Fingerprint fb = molgraph::fingerprint(decode(trace.path.back()));
  trace.best_index = 0;
  trace.best_similarity = -1.0;
  for (std::size_t i = 0; i < trace.path.size(); ++i) {
    const molgraph::Fingerprint fc = molgraph::fingerprint(decode(trace.path[i]));
    const double sim = joint_similarity(fc, fa, fb, mode);
    if (sim > trace.best_similarity) {
      trace.best_similarity = sim;
      trace.best_index = i;
    }
  }
  trace.child = trace.path[trace.best_index];
  return trace;
}

SelfiesString crossover(const SelfiesString& a, const SelfiesString& b, Rng& rng,
                        JointSimilarity mode) {
  return crossover_trace(a, b, rng, mode).child;
}

}  // namespace alchemloop::selfies
