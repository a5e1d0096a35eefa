#pragma once

#include <cstdint>

namespace tmob {

// SplitMix64. Used everywhere randomness is needed so that traces are
// bit-identical across platforms; std:: distributions are not portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform in [0, n).
  uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

  bool coin(double p = 0.5) { return next_double() < p; }

 private:
  uint64_t state_;
};

}  // namespace tmob
