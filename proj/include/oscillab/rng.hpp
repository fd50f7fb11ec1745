#pragma once

#include <cstdint>

namespace oscillab {

/// Deterministic 64-bit generator (splitmix64). Coordinate draws must be
/// reproducible bit-for-bit from a seed, independent of platform and
/// standard-library version, so we do not use <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform draw from {0, ..., n-1}, rejection sampled to avoid modulo bias.
  int uniform_index(int n) {
    const auto span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~0ull - ~0ull % span;
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return static_cast<int>(draw % span);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace oscillab
