#include "cylperc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cylperc/errors.hpp"

namespace cylperc {

Line3 Line3::through(Vec3 point, Vec3 direction) {
  const double len = norm(direction);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("Line3: direction must be nonzero and finite");
  Vec3 d = direction / len;
  if (d.x < 0.0 || (d.x == 0.0 && (d.y < 0.0 || (d.y == 0.0 && d.z < 0.0)))) d = -d;
  Line3 l;
  l.dir = d;
  l.anchor = point - dot(point, d) * d;
  return l;
}

Cylinder::Cylinder(Line3 l, double r) : axis(l), radius(r) {
  if (!(r > 0.0)) throw DomainError("Cylinder: radius must be positive");
}

double dist_point_line(Vec3 p, const Line3& l) { return norm(cross(p - l.anchor, l.dir)); }

Vec3 closest_point_on_line(Vec3 p, const Line3& l) {
  return l.anchor + dot(p - l.anchor, l.dir) * l.dir;
}

bool cylinder_contains(const Cylinder& c, Vec3 p) { return dist_point_line(p, c.axis) <= c.radius; }

HexTiling::HexTiling(double period) : period_(period) {
  if (!(period > 0.0)) throw DomainError("HexTiling: period must be positive");
}

double HexTiling::circumradius() const { return period_ / std::numbers::sqrt3; }

std::array<Vec2, 6> HexTiling::neighbor_vectors() const {
  std::array<Vec2, 6> v;
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    v[k] = {period_ * std::cos(a), period_ * std::sin(a)};
  }
  // Exact values where they are representable.
  v[0] = {period_, 0.0};
  v[3] = {-period_, 0.0};
  return v;
}

Vec2 HexTiling::nearest_center(Vec2 x) const {
  const double row = 0.5 * std::numbers::sqrt3 * period_;
  const double m = x.y / row;
  const double n = (x.x - 0.5 * m * period_) / period_;
  const double m0 = std::floor(m);
  const double n0 = std::floor(n);
  Vec2 best{};
  double best_d2 = INFINITY;
  for (int dm = 0; dm <= 1; ++dm) {
    for (int dn = 0; dn <= 1; ++dn) {
      const double mm = m0 + dm;
      const double nn = n0 + dn;
      const Vec2 c{period_ * (nn + 0.5 * mm), row * mm};
      const double d2 = norm2(x - c);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
  }
  return best;
}

double HexTiling::dist_to_boundary(Vec2 x) const {
  const Vec2 r = x - nearest_center(x);
  static const double s = 0.5 * std::numbers::sqrt3;
  // Unit normals toward the six neighbors.
  const double proj[6] = {r.x, 0.5 * r.x + s * r.y, -0.5 * r.x + s * r.y,
                          -r.x, -0.5 * r.x - s * r.y, 0.5 * r.x - s * r.y};
  const double m = *std::max_element(proj, proj + 6);
  return std::max(0.0, apothem() - m);
}

std::array<Vec2, 6> HexTiling::central_vertices() const {
  std::array<Vec2, 6> v;
  const double rc = circumradius();
  for (int k = 0; k < 6; ++k) {
    const double a = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
    v[k] = {rc * std::cos(a), rc * std::sin(a)};
  }
  return v;
}

bool HexTiling::in_central_face(Vec2 x) const {
  static const double s = 0.5 * std::numbers::sqrt3;
  const double proj[6] = {x.x, 0.5 * x.x + s * x.y, -0.5 * x.x + s * x.y,
                          -x.x, -0.5 * x.x - s * x.y, 0.5 * x.x - s * x.y};
  return *std::max_element(proj, proj + 6) <= apothem();
}

namespace {

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

double HexTiling::dist_to_central_face(Vec2 x) const {
  if (in_central_face(x)) return 0.0;
  const auto v = central_vertices();
  double best = INFINITY;
  for (int k = 0; k < 6; ++k) best = std::min(best, dist_point_segment(x, v[k], v[(k + 1) % 6]));
  return best;
}

double HexTiling::maxdist_to_central_face(Vec2 x) const {
  double best = 0.0;
  for (const Vec2& v : central_vertices()) best = std::max(best, norm(x - v));
  return best;
}

double dist_to_hex_boundary(Vec2 x) {
  static const HexTiling tiling;
  return tiling.dist_to_boundary(x);
}

Vec3 lift_to_H(Vec2 x) { return {x.x, x.y, dist_to_hex_boundary(x)}; }

Vec3 map_F(Vec3 p) { return lift_to_H(project(p)); }

Vec3 map_F(Vec3 p, const HexTiling& tiling) {
  const Vec2 x = project(p);
  return {x.x, x.y, tiling.dist_to_boundary(x)};
}

}  // namespace cylperc
