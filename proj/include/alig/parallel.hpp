#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "alig/types.hpp"

namespace alig {

// Runs fn(i) for i in [0, n) across worker threads.  Tasks must be
// independent (each writing its own output slot); the first exception is
// rethrown on the caller after all workers finish.
template <class Fn>
void parallel_for(Index n, Fn&& fn, unsigned max_threads = 0) {
  if (n <= 0) return;
  unsigned hw = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (hw < 1) hw = 1;
  const unsigned workers = static_cast<unsigned>(std::min<Index>(n, static_cast<Index>(hw)));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace alig
