#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace motocal {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline std::size_t num_chunks(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

// Runs fn(chunk_index, begin, end) over fixed-size index chunks.
// Chunk boundaries depend only on (n, chunk_size), never on the worker
// count, so per-chunk partial results reduced in chunk order are
// bit-identical across runs and across worker counts.
template <class Fn>
void parallel_chunks(std::size_t n, int workers, std::size_t chunk_size, Fn&& fn) {
  if (n == 0) return;
  const std::size_t nchunks = num_chunks(n, chunk_size);
  const int w = std::min<std::size_t>(resolve_workers(workers), nchunks);
  if (w <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    std::size_t c;
    while (!failed.load(std::memory_order_relaxed) &&
           (c = next.fetch_add(1)) < nchunks) {
      try {
        fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int i = 0; i < w; ++i) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace motocal
