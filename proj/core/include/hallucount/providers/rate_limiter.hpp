#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

namespace hallucount::providers {

/// Time source for the limiter; tests substitute a manual clock.
struct LimiterClock {
  using time_point = std::chrono::steady_clock::time_point;
  using duration = std::chrono::steady_clock::duration;

  std::function<time_point()> now = [] { return std::chrono::steady_clock::now(); };
  std::function<void(duration)> sleep = [](duration d) { std::this_thread::sleep_for(d); };
};

/// Admits at most `limit` acquisitions in any rolling window. Keeps the
/// timestamps of the last `limit` admissions; a caller blocks until the
/// oldest one has aged out of the window.
class RateLimiter {
 public:
  RateLimiter(std::size_t limit, std::chrono::steady_clock::duration window,
              LimiterClock clock = {});

  static RateLimiter per_minute(std::size_t requests_per_minute, LimiterClock clock = {}) {
    return RateLimiter(requests_per_minute, std::chrono::minutes(1), std::move(clock));
  }

  RateLimiter(RateLimiter&& other) noexcept;

  /// Blocks until a slot is free, then records the admission time.
  LimiterClock::time_point acquire();

 private:
  std::size_t limit_;
  std::chrono::steady_clock::duration window_;
  LimiterClock clock_;
  std::mutex mu_;
  std::deque<LimiterClock::time_point> admitted_;
};

}  // namespace hallucount::providers
