#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bcz {

inline int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(chunk_index, begin, end) over [0, n_items) split into fixed-size
/// chunks. The chunk layout is independent of the thread count, so chunked
/// reductions (each chunk with its own RNG substream, combined in chunk
/// order afterwards) are bitwise reproducible.
inline void parallel_chunks(std::uint64_t n_items, std::uint64_t chunk_size, int threads,
                            const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn) {
  if (chunk_size == 0) chunk_size = 1;
  const std::uint64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  if (threads <= 1 || n_chunks <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      std::uint64_t b = c * chunk_size;
      std::uint64_t e = std::min(n_items, b + chunk_size);
      fn(c, b, e);
    }
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      std::uint64_t b = c * chunk_size;
      std::uint64_t e = std::min(n_items, b + chunk_size);
      try {
        fn(c, b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int n_workers = std::min<std::uint64_t>(threads, n_chunks);
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bcz
