#pragma once

#include <array>

#include "cylperc/vec.hpp"

namespace cylperc {

// Absolute tolerance used by geometric predicates.
inline constexpr double kGeomTol = 1e-9;

inline constexpr double kDefaultPeriod = 2000.0;
inline constexpr double kSlabHeight = 1000.0;

// A line in R^3 stored canonically: anchor is the point closest to the
// origin and the first nonzero coordinate of dir is positive.
struct Line3 {
  Vec3 anchor;
  Vec3 dir{0.0, 0.0, 1.0};

  // Throws DomainError for a zero direction.
  static Line3 through(Vec3 point, Vec3 direction);

  Vec3 at(double t) const { return anchor + t * dir; }
  Line3 canonical() const { return through(anchor, dir); }
};

struct Cylinder {
  Line3 axis;
  double radius = 1.0;

  Cylinder() = default;
  explicit Cylinder(Line3 l, double r = 1.0);
};

double dist_point_line(Vec3 p, const Line3& l);
Vec3 closest_point_on_line(Vec3 p, const Line3& l);
bool cylinder_contains(const Cylinder& c, Vec3 p);

// Regular hexagonal tiling whose face centers form the lattice
// period * (n + m e^{i pi/3}).
class HexTiling {
 public:
  explicit HexTiling(double period = kDefaultPeriod);

  double period() const { return period_; }
  double apothem() const { return 0.5 * period_; }
  double circumradius() const;

  Vec2 nearest_center(Vec2 x) const;
  double dist_to_boundary(Vec2 x) const;

  // Vertices of the face centered at the origin, counterclockwise.
  std::array<Vec2, 6> central_vertices() const;
  bool in_central_face(Vec2 x) const;
  // Distance from x to the closed central face (0 inside).
  double dist_to_central_face(Vec2 x) const;
  // Largest distance from x to a point of the central face.
  double maxdist_to_central_face(Vec2 x) const;

  // The six lattice vectors to neighboring face centers.
  std::array<Vec2, 6> neighbor_vectors() const;

 private:
  double period_;
};

double dist_to_hex_boundary(Vec2 x);

struct SurfaceH {
  HexTiling tiling;

  double height(Vec2 x) const { return tiling.dist_to_boundary(x); }
  Vec3 lift(Vec2 x) const { return {x.x, x.y, height(x)}; }
};

Vec3 lift_to_H(Vec2 x);
inline Vec2 project(Vec3 p) { return {p.x, p.y}; }
Vec3 map_F(Vec3 p);
Vec3 map_F(Vec3 p, const HexTiling& tiling);

}  // namespace cylperc
