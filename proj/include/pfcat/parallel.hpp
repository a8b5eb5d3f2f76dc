#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pfcat {

/// Splits [0, n) into at most `workers` contiguous chunks and calls
/// `fn(chunk, begin, end)` for each, concurrently when workers > 1. The first
/// exception thrown by any chunk is rethrown after all threads join.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    if (n > 0) fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::size_t step = (n + workers - 1) / workers;
    for (std::size_t c = 0; c < workers; ++c) {
      const std::size_t begin = c * step;
      const std::size_t end = std::min(n, begin + step);
      if (begin >= end) break;
      threads.emplace_back([&, c, begin, end] {
        try {
          fn(c, begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t n, std::size_t workers) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (n == 0) return 0;
  const std::size_t step = (n + workers - 1) / workers;
  return (n + step - 1) / step;
}

}  // namespace pfcat
