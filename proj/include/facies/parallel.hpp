#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace facies {

/// Splits [0, count) into at most `threads` contiguous chunks and runs
/// body(begin, end) on each. Runs inline when threads <= 1. The first
/// exception thrown by any chunk is rethrown after all chunks finish.
template <class Body>
void parallel_chunks(std::size_t count, std::size_t threads, Body&& body) {
  if (threads <= 1 || count < 2) {
    body(std::size_t{0}, count);
    return;
  }
  threads = std::min(threads, count);
  const std::size_t chunk = (count + threads - 1) / threads;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0; begin < count; begin += chunk) {
      pool.emplace_back([&, begin, end = std::min(count, begin + chunk)] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace facies
