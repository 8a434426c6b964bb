#include "nirs/thread_pool.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nirs {

void parallel_for(std::size_t n_tasks, int workers,
                  const std::function<void(std::size_t, int)>& fn) {
  if (n_tasks == 0) return;
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(n_tasks)));
  if (n_threads == 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&](int worker) {
    for (;;) {
      if (failed.load()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t, worker);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) threads.emplace_back(body, w);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nirs
