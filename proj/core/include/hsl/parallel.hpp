#pragma once

#include <cstddef>
#include <functional>

namespace hsl {

/// Number of worker threads used by parallel loops. Reads HSL_THREADS once;
/// defaults to the hardware concurrency.
int thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, never on scheduling, so reductions
/// that combine per-chunk partials in chunk order are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hsl
