#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace bsg {

/// Root seed of a run. Everything random is derived from it through
/// derive_seed(), so one 64-bit value pins an entire experiment.
struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 finalizer: 64-bit avalanche, bijective.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based PRNG (SplitMix64). State is a single 64-bit word, so
/// derived streams are cheap and a run never shares state across streams.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix64(z);
  }

  /// Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unit-mean exponential via inverse CDF.
  double exponential() { return -std::log1p(-uniform01()); }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

  /// Uniform integer in [0, n), unbiased. Requires n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t min = (-n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = next();
    } while (x < min);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

/// Stream labels used when deriving substream seeds, so every consumer of
/// randomness documents where its stream comes from.
namespace stream {
inline constexpr std::uint64_t trial = 1;     // per-trial root in a harness
inline constexpr std::uint64_t axis = 2;      // per-axis-point root in a sweep
inline constexpr std::uint64_t channels = 3;  // channel draw, per player
inline constexpr std::uint64_t start = 4;     // starting profile of a dynamics run
inline constexpr std::uint64_t schedule = 5;  // player-update order
inline constexpr std::uint64_t deviation = 6; // random deviations in checks
}  // namespace stream

/// Derives an independent substream seed from a root seed and a label path,
/// e.g. derive_seed(root, {stream::trial, t}). Each label is avalanched
/// before being folded in, so (trial, player) paths give distinct streams.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(root + 0x9e3779b97f4a7c15ull);
  for (std::uint64_t label : path) {
    h = mix64(h ^ mix64(label + 0xbf58476d1ce4e5b9ull));
  }
  return h;
}

}  // namespace bsg
