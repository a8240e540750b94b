#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrb {

/// Number of worker threads used by the parallel loops. 0 selects the
/// hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, so callers that write results by
/// index stay deterministic. The first exception thrown by a worker is rethrown.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn, std::size_t min_chunk = 2048) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), (n + min_chunk - 1) / min_chunk));
  if (workers <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lrb
