#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cylperc/errors.hpp"
#include "cylperc/geometry.hpp"
#include "cylperc/rng.hpp"

using namespace cylperc;

namespace {

double seg_dist(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double f = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
  return norm(p - (a + f * ab));
}

// Distance to the union of all hexagon edges, enumerating faces near x.
double brute_boundary_distance(Vec2 x, double period = 2000.0) {
  const double R = period / std::sqrt(3.0);
  const Vec2 e1{period, 0.0}, e2{0.5 * period, 0.5 * std::sqrt(3.0) * period};
  // Solve x = a e1 + b e2 for the lattice coordinates.
  const double b = x.y / e2.y;
  const double a = (x.x - b * e2.x) / e1.x;
  double best = INFINITY;
  for (int da = -3; da <= 3; ++da)
    for (int db = -3; db <= 3; ++db) {
      const Vec2 c = (std::floor(a) + da) * e1 + (std::floor(b) + db) * e2;
      for (int k = 0; k < 6; ++k) {
        const double t0 = std::numbers::pi / 6 + k * std::numbers::pi / 3;
        const double t1 = t0 + std::numbers::pi / 3;
        best = std::min(best, seg_dist(x, c + R * Vec2{std::cos(t0), std::sin(t0)}, c + R * Vec2{std::cos(t1), std::sin(t1)}));
      }
    }
  return best;
}

Line3 random_line(Rng& rng, double spread = 10.0) {
  return Line3::through({rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-spread, spread)},
                        rng.unit_vector());
}

}  // namespace

TEST_CASE("canonical lines") {
  const Line3 l = Line3::through({3, 4, 5}, {0, 0, -2});
  CHECK(l.dir.z == doctest::Approx(1.0));
  CHECK(l.anchor.x == doctest::Approx(3.0));
  CHECK(l.anchor.y == doctest::Approx(4.0));
  CHECK(l.anchor.z == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(Line3::through({0, 0, 0}, {0, 0, 0}), DomainError);

  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    const Line3 a = random_line(rng);
    CHECK(std::abs(dot(a.anchor, a.dir)) < 1e-9);
    CHECK(norm(a.dir) == doctest::Approx(1.0));
    // Another point and the reversed direction give the same line.
    const Line3 b = Line3::through(a.at(rng.uniform(-50, 50)), -1.0 * a.dir);
    CHECK(norm(b.anchor - a.anchor) < 1e-9);
    CHECK(norm(b.dir - a.dir) < 1e-12);
    const Line3 c = a.canonical();
    CHECK(norm(c.anchor - a.anchor) < 1e-12);
  }
}

TEST_CASE("point-line distance") {
  const Line3 z = Line3::through({0, 0, 0}, {0, 0, 1});
  CHECK(dist_point_line(z.anchor, z) == 0.0);
  CHECK(dist_point_line({2, 0, 0}, z) == doctest::Approx(2.0));
  const Vec3 cp = closest_point_on_line({2, 0, 5}, z);
  CHECK(norm(cp - Vec3{0, 0, 5}) < 1e-12);

  Rng rng(11);
  for (int k = 0; k < 100000; ++k) {
    const Line3 l = random_line(rng);
    const Vec3 p{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const Vec3 v = p - l.anchor;
    const double oracle = norm(v - dot(v, l.dir) * l.dir);
    REQUIRE(std::abs(dist_point_line(p, l) - oracle) < 1e-9);
    REQUIRE(std::abs(norm(p - closest_point_on_line(p, l)) - oracle) < 1e-9);
  }
}

TEST_CASE("cylinder membership") {
  const Cylinder c(Line3::through({0, 0, 0}, {0, 0, 1}));
  CHECK(cylinder_contains(c, {0, 0, 17}));
  CHECK(cylinder_contains(c, {1, 0, 0}));
  CHECK_FALSE(cylinder_contains(c, {1.000001, 0, 0}));
  CHECK_THROWS_AS(Cylinder(c.axis, 0.0), DomainError);

  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const Cylinder cy(random_line(rng, 2.0), rng.uniform(0.5, 2.0));
    const Vec3 p{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    // Oracle: nearest of densely sampled axis points.
    double best = INFINITY;
    const double t0 = dot(p - cy.axis.anchor, cy.axis.dir);
    for (int s = -2000; s <= 2000; ++s) best = std::min(best, norm(p - cy.axis.at(t0 + s * 1e-3)));
    if (std::abs(best - cy.radius) > 1e-6) REQUIRE(cylinder_contains(cy, p) == (best <= cy.radius));
  }
}

TEST_CASE("hexagonal boundary distance") {
  CHECK(dist_to_hex_boundary({0, 0}) == doctest::Approx(1000.0));
  CHECK(dist_to_hex_boundary({1000, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dist_to_hex_boundary({500, 0}) == doctest::Approx(500.0));
  CHECK(brute_boundary_distance({500, 0}) == doctest::Approx(500.0));

  const HexTiling tiling;
  CHECK(tiling.circumradius() == doctest::Approx(2000.0 / std::sqrt(3.0)));
  for (const Vec2 v : tiling.central_vertices()) CHECK(tiling.dist_to_boundary(v) < 1e-9);

  Rng rng(3);
  for (int k = 0; k < 20000; ++k) {
    const Vec2 x{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    const double d = dist_to_hex_boundary(x);
    REQUIRE(d >= 0.0);
    REQUIRE(d <= 1000.0 + 1e-9);
    REQUIRE(std::abs(d - brute_boundary_distance(x)) < 1e-6);
    for (const Vec2 g : tiling.neighbor_vectors()) REQUIRE(std::abs(dist_to_hex_boundary(x + g) - d) < 1e-6);
    // Nearest center agrees with brute force over nearby lattice points.
    const Vec2 c = tiling.nearest_center(x);
    for (const Vec2 g : tiling.neighbor_vectors()) REQUIRE(norm(x - c) <= norm(x - (c + g)) + 1e-9);
  }
}

TEST_CASE("central face queries") {
  const HexTiling tiling;
  CHECK(tiling.in_central_face({0, 0}));
  CHECK(tiling.in_central_face({999, 0}));
  CHECK_FALSE(tiling.in_central_face({1001, 0}));
  CHECK(tiling.dist_to_central_face({1500, 0}) == doctest::Approx(500.0));
  CHECK(tiling.maxdist_to_central_face({0, 0}) == doctest::Approx(tiling.circumradius()));

  Rng rng(9);
  const auto verts = tiling.central_vertices();
  for (int k = 0; k < 2000; ++k) {
    const Vec2 x{rng.uniform(-5000, 5000), rng.uniform(-5000, 5000)};
    double far = 0.0;
    for (const Vec2 v : verts) far = std::max(far, norm(x - v));
    CHECK(tiling.maxdist_to_central_face(x) == doctest::Approx(far));
    double edge = INFINITY;
    for (int e = 0; e < 6; ++e) edge = std::min(edge, seg_dist(x, verts[e], verts[(e + 1) % 6]));
    const double expect = tiling.in_central_face(x) ? 0.0 : edge;
    CHECK(tiling.dist_to_central_face(x) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("lift, projection and F") {
  const Vec3 top = lift_to_H({0, 0});
  CHECK(top.z == doctest::Approx(1000.0));
  CHECK(norm(project({1, 2, 3}) - Vec2{1, 2}) == 0.0);
  const Vec3 f = map_F({0, 0, 77});
  CHECK(norm(f - Vec3{0, 0, 1000}) < 1e-9);

  Rng rng(21);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const Vec2 x{rng.uniform(-6000, 6000), rng.uniform(-6000, 6000)};
    const Vec3 lx = lift_to_H(x);
    REQUIRE(norm(project(lx) - x) == 0.0);
    REQUIRE(norm(map_F(lx) - lx) <= 1e-9);

    const Vec3 p{x.x, x.y, rng.uniform(-100, 1100)};
    const double scale = std::pow(10.0, rng.uniform(-3, 3));
    const Vec3 q = p + scale * rng.unit_vector();
    REQUIRE(norm(project(p) - project(q)) <= norm(p - q) + 1e-12);
    worst = std::max(worst, norm(map_F(p) - map_F(q)) / norm(p - q));
  }
  CHECK(worst <= std::numbers::sqrt2 + 1e-9);
}
