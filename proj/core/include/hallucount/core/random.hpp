#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace hallucount {

/// SplitMix64 generator with portable bounded draws. std:: distributions are
/// implementation-defined, so seeded artifacts (benchmarks, bootstrap
/// resamples) use this instead to stay identical across standard libraries.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Mixes a base seed with a stream index so sub-tasks get independent streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SeededRng rng(base ^ (stream * 0xD1B54A32D192ED03ULL));
  return rng();
}

}  // namespace hallucount
