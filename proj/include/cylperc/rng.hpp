#pragma once

#include <cstdint>
#include <random>

#include "cylperc/vec.hpp"

namespace cylperc {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed of replica `index` under master seed `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Exp(1).
  double exponential();
  double normal();
  Vec3 unit_vector();
  // Uniform point in the disk of radius r.
  Vec2 disk(double r);
  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cylperc
