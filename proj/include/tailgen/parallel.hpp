#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tailgen {

/// Run fn(0..n-1) across `width` threads pulling from a shared index. The
/// first exception wins; remaining work is abandoned and the exception
/// rethrows on the caller's thread.
inline void parallel_for(std::size_t n, int width,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (width < 1) width = 1;
  if (static_cast<std::size_t>(width) > n) width = static_cast<int>(n);

  if (width == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(width));
  for (int t = 0; t < width; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tailgen
