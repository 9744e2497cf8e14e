#include "alchemloop/molgraph/rings.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace alchemloop::molgraph {

namespace {

// Shortest path from a to b avoiding the direct (a,b) bond; empty if none.
std::vector<std::uint16_t> shortest_cycle_path(const Molecule& m, std::size_t a, std::size_t b) {
  const std::size_t n = m.atom_count();
  std::vector<int> prev(n, -2);
  std::deque<std::size_t> queue;
  queue.push_back(a);
  prev[a] = -1;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == b) break;
    for (const auto& [v, order] : m.neighbors(u)) {
      if (u == a && v == b) continue;  // skip the bond itself
      if (prev[v] == -2) {
        prev[v] = static_cast<int>(u);
        queue.push_back(v);
      }
    }
  }
  if (prev[b] == -2) return {};
  std::vector<std::uint16_t> path;
  for (int v = static_cast<int>(b); v != -1; v = prev[static_cast<std::size_t>(v)]) {
    path.push_back(static_cast<std::uint16_t>(v));
  }
  return path;  // b .. a
}

}  // namespace

RingInfo ring_info(const Molecule& m) {
  RingInfo info;
  info.ring_count = m.bond_count() + 1 - m.atom_count();
  if (info.ring_count == 0) return info;

  std::set<std::vector<std::uint16_t>> seen;
  for (const Bond& bond : m.bonds()) {
    auto path = shortest_cycle_path(m, bond.a, bond.b);
    if (path.empty()) continue;  // bridge bond, not in a cycle
    std::vector<std::uint16_t> key = path;
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) {
      info.rings.push_back(std::move(key));
      info.max_ring_size = std::max(info.max_ring_size, info.rings.back().size());
    }
  }
  std::sort(info.rings.begin(), info.rings.end());
  return info;
}

}  // namespace alchemloop::molgraph
