#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace alspce {

// Runs tasks 0..n_tasks-1 on up to `jobs` threads. Tasks must be independent
// (each owns its rng stream); results are whatever the callable writes to
// task-indexed storage, so the outcome does not depend on scheduling.
inline void run_tasks(std::size_t n_tasks, int jobs,
                      const std::function<void(std::size_t)>& task) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n_tasks);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace alspce
