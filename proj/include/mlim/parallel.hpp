#pragma once

#include <cstddef>
#include <functional>

namespace mlim {

/// Worker count: MEASURE_LIMITS_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each
/// index is visited exactly once; callers write results by index so the
/// outcome does not depend on scheduling. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mlim
