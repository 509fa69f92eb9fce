#include "hallucount/providers/rate_limiter.hpp"

#include "hallucount/core/error.hpp"

namespace hallucount::providers {

RateLimiter::RateLimiter(std::size_t limit, std::chrono::steady_clock::duration window,
                         LimiterClock clock)
    : limit_(limit), window_(window), clock_(std::move(clock)) {
  if (limit_ == 0) throw Error(ErrorCode::kConfig, "requests_per_minute must be positive");
}

RateLimiter::RateLimiter(RateLimiter&& other) noexcept
    : limit_(other.limit_),
      window_(other.window_),
      clock_(std::move(other.clock_)),
      admitted_(std::move(other.admitted_)) {}

LimiterClock::time_point RateLimiter::acquire() {
  // Holding the lock while sleeping keeps admissions in arrival order; all
  // other callers would have to wait for the same slot anyway.
  std::lock_guard lock(mu_);
  auto now = clock_.now();
  while (!admitted_.empty() && now - admitted_.front() >= window_) admitted_.pop_front();
  while (admitted_.size() >= limit_) {
    clock_.sleep(admitted_.front() + window_ - now);
    now = clock_.now();
    while (!admitted_.empty() && now - admitted_.front() >= window_) admitted_.pop_front();
  }
  admitted_.push_back(now);
  return now;
}

}  // namespace hallucount::providers
