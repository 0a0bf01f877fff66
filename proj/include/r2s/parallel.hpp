#pragma once

#include <cstddef>
#include <functional>

namespace r2s {

// Process-wide worker count for parallel_for. 0 restores the hardware default.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(begin, end) over disjoint blocks covering [0, n). Block boundaries
// depend only on n, never on the worker count, so per-slot writes produce
// identical results for any thread count.
void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Per-index convenience wrapper.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace r2s
