#pragma once

#include <cstddef>
#include <functional>

namespace hpa {

// Worker cap: HPA_DYN_THREADS when set to a positive integer, else the
// hardware concurrency.
std::size_t thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() threads. Callers write
// results to per-index slots so the outcome does not depend on scheduling.
// The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hpa
