#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace olp {

// Independent random streams. Every generated quantity draws from its own
// engine, so resizing one dimension never perturbs another.
enum class Stream : std::uint64_t {
  reward = 1,
  consumption = 2,
  walk = 3,
  noise = 4,
  regen = 6,
  trial = 7,
};

// mt19937_64 and seed_seq are fully specified by the standard; the
// distributions below are written out so that output is bit-identical across
// standard library implementations.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
      : engine_(seed_engine(seed, static_cast<std::uint64_t>(stream), index)) {}

  std::uint64_t bits() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one variate per call.
  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
  }

  // 2 Bernoulli(0.5) - 1
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

  // Index drawn from a finite probability vector by inverse CDF.
  std::size_t discrete(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    // rounding in the cumulative sum; fall back to the last positive mass
    for (std::size_t i = probs.size(); i-- > 0;)
      if (probs[i] > 0.0) return i;
    throw std::invalid_argument("discrete: empty distribution");
  }

 private:
  static std::mt19937_64 seed_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

// Seed for an auxiliary sample that must be independent of the run's own
// stream (the training sample of the known-distribution policy, reference
// duals, ...).
inline std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace olp
