#pragma once

#include <functional>

namespace hdsim {

// Number of worker threads: HDSIM_THREADS if set (>=1), else hardware
// concurrency.
int thread_count();

// Run fn(i) for i in [0, n) across workers. Each index is visited exactly
// once; fn must only write to per-index slots. Reductions belong to the
// caller (serial, fixed order) so results are bit-stable across thread
// counts.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace hdsim
