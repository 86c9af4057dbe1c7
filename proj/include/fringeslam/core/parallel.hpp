#pragma once

#include <cstdint>

namespace fringeslam {

// Worker count for all parallel kernels: the OpenMP default, optionally
// capped by the FRINGE_SLAM_THREADS environment variable.
int max_threads();

// Runs body(i) for i in [0, n). Iterations must be independent; given that,
// the result is identical to the serial loop for any thread count, because
// every kernel in this codebase writes only to per-index outputs (reductions
// are kept serial on purpose).
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace fringeslam
