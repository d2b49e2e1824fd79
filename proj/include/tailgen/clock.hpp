#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <thread>

namespace tailgen {

/// Time source for rate limiting and retry backoff. Injectable so that
/// throttling behaviour is testable in milliseconds of wall time.
class Clock {
 public:
  virtual ~Clock() = default;

  /// Microseconds since the clock's epoch (process start or simulation zero).
  virtual std::chrono::microseconds now() = 0;
  virtual void sleep_for(std::chrono::microseconds d) = 0;

  void sleep_until(std::chrono::microseconds t) {
    auto n = now();
    if (t > n) sleep_for(t - n);
  }
};

class SystemClock final : public Clock {
 public:
  SystemClock() : start_(std::chrono::steady_clock::now()) {}

  std::chrono::microseconds now() override {
    return std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start_);
  }

  void sleep_for(std::chrono::microseconds d) override {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Virtual clock: sleeping advances time instead of blocking. Thread-safe;
/// concurrent sleepers each advance the shared timeline.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(std::int64_t start_us = 0) : now_us_(start_us) {}

  std::chrono::microseconds now() override {
    return std::chrono::microseconds(now_us_.load(std::memory_order_relaxed));
  }

  void sleep_for(std::chrono::microseconds d) override {
    if (d.count() > 0) now_us_.fetch_add(d.count(), std::memory_order_relaxed);
  }

  void advance_to(std::chrono::microseconds t) {
    std::int64_t target = t.count();
    std::int64_t cur = now_us_.load(std::memory_order_relaxed);
    while (cur < target &&
           !now_us_.compare_exchange_weak(cur, target, std::memory_order_relaxed)) {
    }
  }

 private:
  std::atomic<std::int64_t> now_us_;
};

using ClockPtr = std::shared_ptr<Clock>;

}  // namespace tailgen
