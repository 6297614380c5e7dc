#include "cylperc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cylperc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::exponential() { return -std::log1p(-uniform()); }

double Rng::normal() {
  // Box-Muller; the cosine branch only, so the stream stays stateless.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 Rng::unit_vector() {
  const double z = 2.0 * uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec2 Rng::disk(double r) {
  const double rho = r * std::sqrt(uniform());
  const double phi = 2.0 * std::numbers::pi * uniform();
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

}  // namespace cylperc
