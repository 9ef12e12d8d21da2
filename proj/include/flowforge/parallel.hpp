#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flowforge {

// Runs fn(i) for i in [0, count) on at most `limit` threads. The first
// exception thrown by any call is rethrown after all workers finish.
template <typename Fn>
void for_each_bounded(std::size_t count, std::size_t limit, Fn &&fn) {
  const std::size_t workers = std::min(count, std::max<std::size_t>(limit, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure)
              failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace flowforge
