#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cylperc/errors.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/rng.hpp"
#include "cylperc/stats.hpp"

using namespace cylperc;

namespace {

constexpr double kPi = std::numbers::pi;

// Distance from p to the solid S(c, s) x [z0, z1].
double slab_distance(Vec3 p, Vec2 c, double s, double z0, double z1) {
  const double dh = std::max(0.0, norm(xy(p) - c) - s);
  const double dz = std::max({0.0, z0 - p.z, p.z - z1});
  return std::hypot(dh, dz);
}

// Independent line sampler: uniform direction, uniform offset in the
// orthogonal disk of radius R around c.
Line3 oracle_line(Rng& rng, Vec3 c, double R) {
  const Vec3 d = rng.unit_vector();
  const Vec3 seed = std::abs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = cross(d, seed);
  e1 = e1 / norm(e1);
  const Vec3 e2 = cross(d, e1);
  const Vec2 w = rng.disk(R);
  return Line3::through(c + w.x * e1 + w.y * e2, d);
}

}  // namespace

TEST_CASE("measure of lines hitting balls") {
  CHECK(mu_lines_hitting_ball(0.0) == 0.0);
  CHECK(mu_lines_hitting_ball(1.0) == doctest::Approx(kPi));
  CHECK(mu_lines_hitting_ball(2.0) == doctest::Approx(4 * kPi));
  CHECK(mu_cylinders_hitting(Window::ball({0, 0, 0}, 0.0)) == doctest::Approx(kPi));
  CHECK(mu_cylinders_hitting(Window::ball({5, 5, 5}, 9.0)) == doctest::Approx(100 * kPi));
  CHECK_THROWS_AS(mu_cylinders_hitting(Window::disk_slab({0, 0}, 3.0)), DomainError);

  // Monte Carlo over the product measure with offsets in a disk of radius 5.
  Rng rng(1);
  const int n = 200000;
  for (double r : {1.0, 2.0}) {
    int hit = 0;
    for (int k = 0; k < n; ++k) hit += dist_point_line({0, 0, 0}, oracle_line(rng, {0, 0, 0}, 5.0)) <= r;
    const double p = static_cast<double>(hit) / n;
    const double est = 25 * kPi * p;
    const double se = 25 * kPi * std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(est - mu_lines_hitting_ball(r)) < 3 * se);
  }
}

TEST_CASE("poisson sampler") {
  const Window w = Window::ball({1, 2, 3}, 9.0);
  CHECK(sample_poisson(0.0, w, 1).lines.empty());

  const LineSample a = sample_poisson(1.0, w, 42);
  const LineSample b = sample_poisson(1.0, w, 42);
  REQUIRE(a.lines.size() == b.lines.size());
  for (std::size_t k = 0; k < a.lines.size(); ++k) {
    CHECK(a.lines[k].anchor == b.lines[k].anchor);
    CHECK(a.lines[k].dir == b.lines[k].dir);
    CHECK(dist_point_line(w.enclosing_center(), a.lines[k]) <= w.enclosing_radius() + 1.0 + 1e-9);
  }

  // Nested in u under a fixed seed.
  const LineSample lo = sample_poisson(0.3, w, 42);
  REQUIRE(lo.lines.size() <= a.lines.size());
  for (std::size_t k = 0; k < lo.lines.size(); ++k) CHECK(lo.lines[k].anchor == a.lines[k].anchor);

  RunningStats counts;
  for (std::uint64_t s = 0; s < 3000; ++s) counts.add(static_cast<double>(sample_poisson(1.0, w, derive_seed(9, s)).lines.size()));
  CHECK(std::abs(counts.mean() - 100 * kPi) < 3 * std::sqrt(100 * kPi / 3000.0));
  CHECK(counts.variance() == doctest::Approx(100 * kPi).epsilon(0.1));

  CHECK_THROWS_AS(sample_poisson(1.0, Window::ball({0, 0, 0}, 1e5), 1), ResourceLimit);
}

TEST_CASE("superposition and thinning") {
  const Window big = Window::ball({0, 0, 0}, 10.0);
  const Window small = Window::ball({0, 0, 0}, 4.0);
  std::vector<std::size_t> merged, direct, thinned;
  for (std::uint64_t s = 0; s < 3000; ++s) {
    merged.push_back(sample_poisson(0.2, small, derive_seed(1, s)).lines.size() +
                     sample_poisson(0.3, small, derive_seed(2, s)).lines.size());
    direct.push_back(sample_poisson(0.5, small, derive_seed(3, s)).lines.size());
    std::size_t k = 0;
    for (const Line3& l : sample_poisson(0.5, big, derive_seed(4, s)).lines) k += hits_region(l, small);
    thinned.push_back(k);
  }
  CHECK(two_sample_chi_square(merged, direct).p_value > 0.01);
  CHECK(two_sample_chi_square(thinned, direct).p_value > 0.01);
}

TEST_CASE("invariance of hit probabilities") {
  // A ball at p and its rotation about the origin, and a lattice translate.
  const Vec3 p{30, 0, 10};
  const Vec3 rp{0, 30, 10};
  const Window sampler = Window::ball({0, 0, 0}, 40);
  std::size_t hp = 0, hr = 0;
  const std::size_t n = 4000;
  for (std::size_t s = 0; s < n; ++s) {
    const LineSample smp = sample_poisson(0.002, sampler, derive_seed(5, s));
    bool a = false, b = false;
    for (const Line3& l : smp.lines) {
      a |= dist_point_line(p, l) <= 2.0;
      b |= dist_point_line(rp, l) <= 2.0;
    }
    hp += a;
    hr += b;
  }
  const double se = std::sqrt(2.0 * 0.25 / n);
  CHECK(std::abs(static_cast<double>(hp) - static_cast<double>(hr)) / n < 3 * se);

  std::size_t v0 = 0, v1 = 0;
  const Vec3 q{0, 0, 0}, qg{2000, 0, 0};
  for (std::size_t s = 0; s < 20000; ++s) {
    v0 += point_vacant(sample_poisson(0.2, Window::ball(q, 0.0), derive_seed(6, s)), q);
    v1 += point_vacant(sample_poisson(0.2, Window::ball(qg, 0.0), derive_seed(7, s)), qg);
  }
  CHECK(std::abs(static_cast<double>(v0) - static_cast<double>(v1)) / 20000.0 < 3 * std::sqrt(2 * 0.25 / 20000.0));
}

TEST_CASE("hits_region against dense parameter scan") {
  const Window w = Window::disk_slab({0, 0}, 3.0, 0.0, 5.0);
  CHECK(hits_region(Line3::through({0, 0, 0}, {0, 0, 1}), w));
  const Window ball = Window::ball({0, 0, 0}, 1.0);
  CHECK_FALSE(hits_region(Line3::through({2.5, 0, 0}, {0, 0, 1}), ball));
  CHECK(hits_region(Line3::through({1.9, 0, 0}, {0, 0, 1}), ball));

  Rng rng(17);
  int compared = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vec2 c{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double s = rng.uniform(0.5, 4.0);
    const double z0 = rng.uniform(-3, 3), z1 = z0 + rng.uniform(0.0, 4.0);
    const Window ws = Window::disk_slab(c, s, z0, z1);
    const Line3 l = oracle_line(rng, {c.x, c.y, 0.5 * (z0 + z1)}, s + 4.0);
    const double t0 = dot(Vec3{c.x, c.y, 0.5 * (z0 + z1)} - l.anchor, l.dir);
    double best = INFINITY;
    for (int m = -15000; m <= 15000; ++m) best = std::min(best, slab_distance(l.at(t0 + m * 1e-3), c, s, z0, z1));
    if (std::abs(best - 1.0) < 2e-3) continue;
    ++compared;
    REQUIRE(hits_region(l, ws) == (best <= 1.0));
  }
  CHECK(compared > 9000);
}

TEST_CASE("coverage of query windows") {
  const Window slab = Window::disk_slab({0, 0}, 100.0);
  CHECK(covers(slab, Window::disk_slab({0, 0}, 100.0, 0.0, 0.0)));
  CHECK(covers(slab, Window::disk_slab({10, 0}, 50.0)));
  CHECK_FALSE(covers(slab, Window::disk_slab({80, 0}, 50.0)));
  CHECK(covers(Window::ball({0, 0, 0}, 10), Window::ball({1, 0, 0}, 5)));
  CHECK_FALSE(covers(Window::ball({0, 0, 0}, 10), Window::ball({8, 0, 0}, 5)));
}

TEST_CASE("counting lines hitting two windows") {
  const Window w1 = Window::ball({0, 0, 0}, 1.0);
  const Window w2 = Window::ball({20, 0, 0}, 1.0);
  const Window both = Window::ball({10, 0, 0}, 12.0);
  CHECK(count_hitting_both(fixed_sample(both, {}), w1, w2) == 0);
  CHECK(count_hitting_both(fixed_sample(both, {Line3::through({0, 0, 0}, {1, 0, 0})}), w1, w2) == 1);
  CHECK_THROWS_AS(count_hitting_both(fixed_sample(w1, {}), w1, w2), CoverageError);

  const Estimate self = estimate_mu_hitting_both(w1, w1, 200000, 3);
  CHECK(std::abs(self.value - 4 * kPi) < 3 * self.se + 1e-9);

  // Mean count over seeds against u times the measure estimate.
  const double u = 2.0;
  const Estimate mu = estimate_mu_hitting_both(w1, w2, 400000, 8);
  RunningStats c;
  for (std::uint64_t s = 0; s < 4000; ++s) c.add(static_cast<double>(count_hitting_both(sample_poisson(u, both, derive_seed(8, s)), w1, w2)));
  CHECK(std::abs(c.mean() - u * mu.value) < 3 * std::hypot(c.stderr_of_mean(), u * mu.se));

  const Estimate far = estimate_mu_hitting_both(w1, Window::ball({1e4, 0, 0}, 1.0), 100000, 2);
  CHECK(far.value < 1e-6);
}

TEST_CASE("point vacancy and covariance") {
  const Vec3 p{1, 1, 1};
  CHECK(point_vacant(fixed_sample(Window::ball(p, 0.0), {}), p));
  CHECK_FALSE(point_vacant(fixed_sample(Window::ball(p, 0.0), {Line3::through(p, {1, 2, 3})}), p));

  const double u = 0.5;
  const CovarianceEstimate same = covariance_estimate(p, p, u, 20000, 4, 200000);
  const double pv = std::exp(-u * kPi);
  CHECK(std::abs(same.mc.value - pv * (1 - pv)) < 3 * same.mc.se + 1e-3);
  CHECK(same.semi_analytic.value == doctest::Approx(pv * (1 - pv)).epsilon(0.02));

  const CovarianceEstimate far = covariance_estimate(p, p + Vec3{1000, 0, 0}, u, 20000, 5, 200000);
  CHECK(std::abs(far.mc.value) < 3 * far.mc.se + 1e-4);
}
