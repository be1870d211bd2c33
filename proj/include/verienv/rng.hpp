#pragma once

#include <cstdint>

namespace verienv {

// splitmix64, constants from Steele/Lea/Flood. Used everywhere seeded data is
// generated so state populations hash identically across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [lo, hi] via rejection-free modulo; bias is irrelevant at the
  // range sizes used here but keep ranges well below 2^32 anyway.
  uint64_t next_in(uint64_t lo, uint64_t hi) {
    return lo + next() % (hi - lo + 1);
  }

  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b) {
  SplitMix64 rng(base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
  return rng.next();
}

}  // namespace verienv
