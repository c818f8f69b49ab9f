#pragma once

#include <cstdint>
#include <random>

namespace nhk {

/// SplitMix64 finalizer. Used to decorrelate user seeds and to derive
/// per-realization stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of realization `realization` at grid point (L, w_index):
/// base_seed xor a mixed hash of the triple.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, int L, int w_index,
                                    int realization) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(L));
  h = splitmix64(h ^ static_cast<std::uint64_t>(w_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(realization));
  return base_seed ^ h;
}

/// 64-bit Mersenne twister seeded through SplitMix64. One instance per stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in [0, 1) with 53 random bits; identical across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nhk
