#pragma once

#include <cstdint>
#include <vector>

#include "alchemloop/molgraph/molecule.hpp"

namespace alchemloop::molgraph {

struct RingInfo {
  // Cycle rank of the (connected) graph: bonds - atoms + 1.
  std::size_t ring_count = 0;
  std::size_t max_ring_size = 0;
  // Smallest cycle through each cyclic bond, deduplicated by vertex set
  // and sorted for determinism.
  std::vector<std::vector<std::uint16_t>> rings;
};

RingInfo ring_info(const Molecule& m);

}  // namespace alchemloop::molgraph
