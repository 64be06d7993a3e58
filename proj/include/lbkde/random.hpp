#pragma once

#include <cstdint>
#include <random>

namespace lbkde {

/// Mixes a 64-bit word with the SplitMix64 finalizer. Bijective on uint64_t.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trial `trial_index` within an experiment seeded by `master_seed`:
///
///   seed = splitmix64(master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15)
///
/// The multiplier is odd, so for a fixed master seed the map index -> seed is
/// injective modulo 2^64 (and splitmix64 is a bijection): distinct trials never
/// share a seed.
constexpr std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
  return splitmix64(master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Per-trial random stream. Not shared between threads.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), built from the top 53 bits.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  double normal() { return normal_(engine_); }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace lbkde
