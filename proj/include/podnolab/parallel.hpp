#pragma once

#include <cstddef>
#include <functional>

namespace podnolab {

// Worker count: PODNOLAB_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int thread_count();

// Runs fn(i) for i in [0, n) over up to thread_count() workers. Each index is
// visited exactly once; callers keep results per index so that reductions
// happen afterwards in a fixed order. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace podnolab
