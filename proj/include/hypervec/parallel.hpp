#pragma once

// Minimal deterministic work splitting: a row range is cut into contiguous
// chunks, one per worker. Results must be written to disjoint slots so the
// outcome is identical for any thread count.

#include <cstddef>
#include <functional>

namespace hypervec {

// Invokes fn(lo, hi) over contiguous sub-ranges of [0, rows) using up to
// `threads` workers (clamped to rows; 0 behaves as 1). The first exception
// thrown by any worker is rethrown after all workers have joined.
void parallel_rows(std::size_t rows, std::size_t threads,
                   const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace hypervec
