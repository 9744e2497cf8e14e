#include "alchemloop/molgraph/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace alchemloop::molgraph {

namespace {

std::uint64_t hash_mix(std::uint64_t z) {
  z ^= 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return hash_mix(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

}  // namespace

Fingerprint::Fingerprint(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {
  if (bits == 0) throw std::invalid_argument("fingerprint must have at least one bit");
}

std::size_t Fingerprint::popcount() const {
  std::size_t s = 0;
  for (const std::uint64_t w : words_) s += static_cast<std::size_t>(std::popcount(w));
  return s;
}

Fingerprint fingerprint(const Molecule& m, std::size_t bits) {
  const std::size_t n = m.atom_count();
  std::vector<std::uint64_t> env(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = m.atom(i);
    std::uint64_t h = hash_mix(static_cast<std::uint64_t>(a.element) + 1);
    h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 8));
    h = hash_combine(h, static_cast<std::uint64_t>(m.degree(i)));
    h = hash_combine(h, static_cast<std::uint64_t>(a.implicit_h));
    env[i] = h;
  }

  Fingerprint fp(bits);
  for (int radius = 0; radius <= 2; ++radius) {
    for (std::size_t i = 0; i < n; ++i) {
      fp.set(static_cast<std::size_t>(env[i] % bits));
    }
    if (radius == 2) break;
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> nb;
      for (const auto& [v, order] : m.neighbors(i)) {
        nb.emplace_back(static_cast<std::uint64_t>(order), env[v]);
      }
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = hash_combine(env[i], static_cast<std::uint64_t>(radius + 1));
      for (const auto& [order, hv] : nb) {
        h = hash_combine(h, order);
        h = hash_combine(h, hv);
      }
      next[i] = h;
    }
    env = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.bit_size() != b.bit_size()) throw std::invalid_argument("fingerprint size mismatch");
  std::size_t both = 0;
  std::size_t any = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(std::popcount(a.words()[w] & b.words()[w]));
    any += static_cast<std::size_t>(std::popcount(a.words()[w] | b.words()[w]));
  }
  if (any == 0) return 1.0;  // two empty structures are identical
  return static_cast<double>(both) / static_cast<double>(any);
}

}  // namespace alchemloop::molgraph
