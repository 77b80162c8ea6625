#pragma once

#include <cstdint>

namespace archetype {

// SplitMix64 generator. The exact state update, output mixing, and
// unit-interval mapping are part of the tool's reproducibility contract:
// a stream is fully determined by its seed, on every platform, so seeds
// recorded in a run report replay bitwise anywhere.
class Prng {
public:
  explicit Prng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace archetype
