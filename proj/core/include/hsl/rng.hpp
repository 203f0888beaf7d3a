#pragma once

#include <cstdint>

namespace hsl {

/// Counter-based generator: the k-th draw of stream (seed, stream_id) is
/// splitmix64(seed ^ mix(stream_id) + k * 0x9E3779B97F4A7C15). Any draw can be
/// reproduced from (seed, stream, counter) alone, independently of call order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller on two consecutive draws.
  double normal();

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace hsl
