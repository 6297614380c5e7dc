#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cylperc/geometry.hpp"
#include "cylperc/rng.hpp"

namespace cylperc {

// Polyline parameterized proportionally to arc length on [0, 1].
class Polyline {
 public:
  // Throws DomainError for fewer than two vertices or repeated consecutive vertices.
  explicit Polyline(std::vector<Vec3> vertices);

  const std::vector<Vec3>& vertices() const { return v_; }
  double length() const { return cum_.back(); }
  Vec3 at(double t) const;
  // Parameter of vertex k.
  double param(std::size_t k) const { return cum_[k] / cum_.back(); }

 private:
  std::vector<Vec3> v_;
  std::vector<double> cum_;
};

struct CoreSegment {
  // Endpoints of the projection of C1 n C2 onto each axis.
  Vec3 x[2];
  Vec3 y[2];
  // Axis parameters of the endpoints (relative to each canonical anchor).
  double t_lo[2] = {0, 0};
  double t_hi[2] = {0, 0};
};

// Smallest distance from the disk {axis_from(t) + v : v . dir = 0, |v| <= r_from}
// to the axis of `to`, by exact minimization of the convex quadratic.
double disk_to_axis_distance(const Cylinder& from, double t, const Line3& to);

CoreSegment core_segment(const Cylinder& c1, const Cylinder& c2, double tol = 1e-10);

double dist_point_segment(Vec3 p, Vec3 a, Vec3 b);
double hausdorff_segments(Vec3 a0, Vec3 a1, Vec3 b0, Vec3 b1);
double hausdorff_endpoint_sets(Vec3 a0, Vec3 a1, Vec3 b0, Vec3 b1);

struct TubeResult {
  Line3 axis;
  double t1 = 0.0;
  double t2 = 1.0;
  int axis_index = 1;  // 1 or 2
  std::string branch;  // "disjoint", "parallel" or "core"
};

TubeResult tube_from_two_cylinders(const Cylinder& c1, const Cylinder& c2, const Polyline& eta, double a0);

// Largest distance from eta([t1, t2]) to the line.
double max_dist_to_line(const Polyline& eta, double t1, double t2, const Line3& l);

struct TubeInstance {
  Cylinder c1;
  Cylinder c2;
  std::vector<Vec3> vertices;
  double a0 = 1000.0;
};

// Random pair of intersecting, non-parallel cylinders with radii in [0.5, 1].
std::pair<Cylinder, Cylinder> random_intersecting_pair(Rng& rng);

// Random cylinder pair with a polyline inside their union whose endpoints
// are at least a0/10 apart; mixes intersecting, parallel and disjoint pairs.
TubeInstance random_tube_instance(Rng& rng, double a0);

// Corpus line: anchor1(3) dir1(3) radius1 anchor2(3) dir2(3) radius2 N
// vertices(3N) a0, whitespace separated.
TubeInstance parse_tube_instance(const std::string& line);
std::string format_tube_instance(const TubeInstance& inst);

struct HorizonResult {
  double max_free = 0.0;
  bool unbounded = false;
  double theta = 0.0;
  double offset = 0.0;
};

// Longest segment of a line staying inside the padding-neighborhood of the
// tiling boundary, over a grid of directions and offsets.
HorizonResult horizon_scan(double padding = 20.0, int directions = 720, int offsets = 400, double max_len = 2e4,
                           const HexTiling& tiling = HexTiling());
// Free runs of the single line {offset * perp(e) + s e}, e = (cos theta, sin theta).
double horizon_line(double theta, double offset, double padding, double max_len, bool& unbounded,
                    const HexTiling& tiling = HexTiling());

// True iff S(x0, a0/10) is NOT connected to the circle of radius a0
// through the traces of the two cylinders on H.
bool blocking_check(const Cylinder& c1, const Cylinder& c2, Vec2 x0, double a0, double h = 0.5);

// Largest |F(q) - q| over axis points q closest to occupied trace cells.
double max_axis_F_displacement(const Cylinder& c, Vec2 x0, double a0, double h = 0.5);

// Random two-cylinder configuration drawn from the adversarial families.
std::pair<Cylinder, Cylinder> random_adversarial_pair(Rng& rng, Vec2 x0, double a0);

}  // namespace cylperc
