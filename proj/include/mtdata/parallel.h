#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mtdata {

// Runs fn(i) for i in [0, n) on up to `workers` threads.  Callers write
// results into pre-sized slots indexed by i, so output order never depends
// on scheduling.  The first exception thrown by any task is rethrown.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn, size_t workers = std::thread::hardware_concurrency()) {
  workers = std::clamp<size_t>(workers, 1, std::max<size_t>(n, 1));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace mtdata
