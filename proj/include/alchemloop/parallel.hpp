#pragma once

#include <cstddef>
#include <functional>

namespace alchemloop {

// Worker count for batch-parallel phases: ALCHEMLOOP_THREADS if set,
// otherwise hardware concurrency capped at 8. Always at least 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on worker_count() threads. Callers write
// results by index into preallocated storage, so output order (and any
// later sequential reduction) is independent of the thread schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace alchemloop
