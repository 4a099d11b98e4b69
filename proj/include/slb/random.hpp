#pragma once

// Seed derivation for reproducible, schedule-independent experiments.
//
// Every stream is keyed by a tuple of integers folded through the SplitMix64
// finalizer. The mixing function is part of the output contract: changing it
// changes every CSV the harness produces.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace slb {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a key tuple into one 64-bit seed: h = mix64(h ^ key_i), h0 = mix64(master).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : keys) h = mix64(h ^ k);
  return h;
}

// Stream tags keep the testbed draw, agent sampling and reward draws apart.
inline constexpr std::uint64_t kTestbedStream = 0x7465737462656431ULL;  // "testbed1"
inline constexpr std::uint64_t kAgentStream = 0x6167656e74733031ULL;    // "agents01"
inline constexpr std::uint64_t kRewardStream = 0x7265776172647331ULL;   // "rewards1"

/// Small counter-based generator; cheap to construct once per reward draw.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// General-purpose generator for testbed draws and agent sampling.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from 53 random bits.
template <std::uniform_random_bit_generator G>
double uniform01(G& gen) {
  static_assert(G::max() == std::numeric_limits<std::uint64_t>::max() && G::min() == 0,
                "uniform01 expects a full-range 64-bit generator");
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace slb
