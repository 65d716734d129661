// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace prext {

// Counter-based splittable generator built on the SplitMix64 output
// function (Steele, Lea, Flood; finalizer by Vigna).  The stream is a
// pure function of (seed, counter), so identical seeds give identical
// sequences on every platform, and disjoint streams for parallel work
// are derived with split() instead of sharing state.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kGamma); }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bool(double p) { return next_double() < p; }

  bool next_bit() { return (next_u64() >> 63) != 0; }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Independent child stream; identified by the label so that
  // split(k) is reproducible regardless of draw order.
  SplitMix64 split(std::uint64_t label) const {
    return SplitMix64(mix(seed_ ^ mix(label + kGamma)));
  }

  std::uint64_t seed() const { return seed_; }

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace prext
