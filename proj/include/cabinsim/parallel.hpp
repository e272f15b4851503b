#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cabinsim {

inline int resolve_thread_count(int hint) {
  if (hint > 0) return hint;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs f(begin, end) over disjoint contiguous blocks of [0, n).
///
/// Each index belongs to exactly one block and blocks are processed
/// independently, so results are reproducible for any thread count as long
/// as f only writes state owned by its own indices.
template <class F>
void parallel_blocks(std::size_t n, int threads, F&& f) {
  if (n == 0) return;
  const std::size_t t =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_thread_count(threads)), n);
  if (t <= 1) {
    f(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  std::mutex err_mutex;
  std::exception_ptr error;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        f(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cabinsim
