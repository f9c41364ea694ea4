#pragma once

#include <cstdint>
#include <limits>

namespace agepop {

/// Counter-based generator: the k-th output of stream s under seed m is a
/// fixed bijective mix of (key(m, s) + k * golden gamma). Streams are
/// independent of the order in which they are consumed, which makes
/// replica output independent of the thread schedule.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t master_seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Master seed plus the substream rule: replica i draws from stream i.
struct RngSpec {
  std::uint64_t master_seed = 42;

  CounterRng replica(std::uint64_t i) const { return CounterRng(master_seed, i); }
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace agepop
