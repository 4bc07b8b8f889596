#pragma once

#include <cstddef>
#include <functional>

namespace ozonecast {

// Maximum worker count: OZONECAST_THREADS when set (clamped to >= 1),
// otherwise the hardware concurrency. Read on every call so tests can vary
// it at runtime.
int max_threads();

// Runs fn(i) for i in [0, n). Work items must be independent; results must
// be written to per-index slots so the outcome is identical for any worker
// count. The first exception (by index) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ozonecast
