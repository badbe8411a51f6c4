#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vortex::detail {

inline unsigned resolve_thread_count(unsigned requested, std::size_t n_items) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("VORTEX_THREADS")) n = unsigned(std::atoi(env));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return unsigned(std::min<std::size_t>(n, std::max<std::size_t>(n_items, 1)));
}

/// Runs fn(i) for i in [0, n) on up to n_threads threads (0 = automatic, or
/// the VORTEX_THREADS environment override). Static chunking; the caller is
/// responsible for writing results by index so the outcome does not depend
/// on scheduling. The first exception thrown by any item is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
  if (n == 0) return;
  const unsigned workers = resolve_thread_count(n_threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::size_t(w) * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace vortex::detail
