#pragma once

#include <cstddef>
#include <functional>

namespace latticegap {

/// Caps the number of worker threads used by grid sweeps (0 = hardware).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Calls body(i) for i in [0, count), possibly concurrently. Callers write
/// results into per-index slots and reduce afterwards in index order, which
/// keeps results bit-identical regardless of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace latticegap
