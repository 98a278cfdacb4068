#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cvflock {

// splitmix64 finalizer. Used to derive independent child streams from a
// master seed; good enough avalanche that stream ids 0,1,2,... are fine.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream derivation: substream(seed, a, b, c) is a stable
// function of its arguments only, so episode k of run s always sees the
// same stream no matter what else consumed randomness before it.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b)) ^ mix64(c));
}

// Deterministic RNG with self-contained double distributions. The engine is
// the standard-specified mt19937_64; uniform/normal are implemented here so
// that streams are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, one-shot Box-Muller (second value discarded)
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // uniform integer in [0, n); n must be > 0. Bias of the float path is
  // < 2^-40 for the n used here (shuffles, coin flips).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cvflock
