#pragma once

#include <cstddef>
#include <functional>

namespace nirs {

/// Runs fn(task, worker) for task in [0, n_tasks) on up to `workers` threads.
/// Tasks are claimed in index order; `worker` is a stable slot id in
/// [0, workers) so callers can keep per-worker resources. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n_tasks, int workers,
                  const std::function<void(std::size_t task, int worker)>& fn);

}  // namespace nirs
