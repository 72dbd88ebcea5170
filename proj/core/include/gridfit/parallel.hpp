#pragma once

#include <cstddef>
#include <functional>

namespace gridfit {

/// Worker-thread budget: hardware concurrency, capped by the GRIDFIT_THREADS
/// environment variable when set to a positive integer.
unsigned thread_budget();

/// Runs fn(0..n-1), sharding across the thread budget when it pays off.
/// fn must be safe to call concurrently for distinct indices. The first
/// exception (by index) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gridfit
