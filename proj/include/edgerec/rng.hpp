#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace edgerec {

// SplitMix64 finalizer, used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one (unreliability level, trial) cell of an experiment. Streams
/// are independent of the order in which trials execute.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed,
                                   std::uint64_t level_index,
                                   std::uint64_t trial_index) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ level_index);
  h = splitmix64(h ^ trial_index);
  return h;
}

/// Seeded generator with hand-rolled draw primitives so that streams are
/// identical across platforms and standard-library versions (mt19937_64 and
/// everything below it is fully pinned down).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  std::size_t uniform_below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be >= 1");
    const std::uint64_t span = n;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % span;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % span);
  }

  /// True with probability p. Always consumes exactly one draw.
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgerec
