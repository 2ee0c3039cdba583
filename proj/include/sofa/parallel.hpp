#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sofa {

/// Runs fn(worker) on `workers` threads (inline when workers <= 1) and
/// rethrows the first exception raised by any of them.
template <typename Fn>
void run_workers(std::size_t workers, Fn&& fn) {
  if (workers <= 1) {
    fn(std::size_t{0});
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          fn(w);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Half-open bounds of contiguous chunk `w` of `count` items split `workers` ways.
inline std::pair<std::size_t, std::size_t> chunk_bounds(std::size_t count, std::size_t workers,
                                                        std::size_t w) {
  return {count * w / workers, count * (w + 1) / workers};
}

}  // namespace sofa
