#pragma once

#include <cstdint>

namespace hategraph {

// SplitMix64. Standard-library distributions are not bit-reproducible across
// implementations, and every artifact here (checkpoints, corpora) must be,
// so all randomness goes through this generator.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant at the
  // ranges used here (tree shapes, template picks).
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  bool next_bool() { return (next_u64() & 1) != 0; }

 private:
  uint64_t state_;
};

}  // namespace hategraph
