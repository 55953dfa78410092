#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace osl {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Work items are
// independent; callers store results by index and reduce in index order, so
// output never depends on the thread count. The first exception thrown by
// any item is rethrown after all threads join.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body body) {
  const std::size_t cap = std::max<std::size_t>(count, 1);
  jobs = static_cast<unsigned>(std::clamp<std::size_t>(jobs, 1, cap));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline unsigned default_jobs() noexcept {
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace osl
