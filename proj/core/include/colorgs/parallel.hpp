#pragma once

#include <functional>

namespace colorgs {

/// Splits [0, rows) into `workers` contiguous chunks and runs
/// fn(begin, end, worker) on each, worker 0 on the calling thread.
/// Chunk boundaries depend only on (rows, workers).
void parallel_rows(int rows, int workers, const std::function<void(int, int, int)>& fn);

/// Clamps a requested worker count to [1, rows].
int effective_workers(int requested, int rows);

}  // namespace colorgs
