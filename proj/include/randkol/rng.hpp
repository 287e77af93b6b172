#pragma once

// Pseudo-random machinery. One fixed generator (xoshiro256**, seeded through
// SplitMix64) and one fixed seed-mixing function are used by every stochastic
// code path, so results are bit-reproducible across platforms and across any
// sharding of trials over threads.

#include <cstdint>

#include "randkol/types.hpp"

namespace randkol {

// One SplitMix64 step: advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives the seed of trial `index` from a base seed:
//   mix(s, i) = splitmix64 output for state s + i * golden_gamma.
// Every per-trial generator is derived exactly this way, so any single trial
// can be reproduced in isolation regardless of how trials were sharded.
inline Seed mix(Seed base, std::uint64_t index) {
  std::uint64_t state = base.value + index * 0x9E3779B97F4A7C15ull;
  return Seed{splitmix64(state)};
}

// xoshiro256**. State is filled from SplitMix64 on the seed, as its authors
// recommend; the all-zero state (unreachable in practice) is patched to a
// fixed non-zero word.
class Xoshiro256StarStar {
public:
  explicit Xoshiro256StarStar(Seed seed) {
    std::uint64_t sm = seed.value;
    for (auto& word : s_) word = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) built from the top 53 bits of one output.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Bernoulli draw: true with probability p, via next_unit() < p.
  bool bernoulli(double p) { return next_unit() < p; }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace randkol
