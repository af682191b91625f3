#pragma once

#include <cstdint>
#include <limits>

namespace vcsim {

/// Independent random subsystems. Every draw in a replication comes from a
/// stream keyed by (replication seed, subsystem, entity ids), so adding draws
/// to one subsystem never shifts another.
enum class Stream : std::uint64_t {
  Replication = 1,
  Placement,
  Speed,
  Reaction,
  PseudonymPhase,
  BeaconPhase,
  Backoff,
  Fading,
};

/// 64-bit finalizer (SplitMix64 / Stafford mix 13). Bijective.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                         std::uint64_t b = 0);

/// Seed of replication `index` under `master_seed`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index);

/// Counter-based generator: the n-th output is a pure function of
/// (key, n). Satisfies UniformRandomBitGenerator, so it plugs into the
/// <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0)
      : CounterRng(stream_key(seed, stream, a, b)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace vcsim
