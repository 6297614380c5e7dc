#include "cylperc/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "cylperc/errors.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/renormalization.hpp"
#include "cylperc/surface.hpp"
#include "cylperc/trace.hpp"

namespace cylperc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParallelSin = 1e-6;
constexpr double kMemberTol = 1e-9;

// Orthonormal pair spanning the plane orthogonal to unit d.
std::pair<Vec3, Vec3> plane_basis(Vec3 d) {
  const Vec3 seed = std::abs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = cross(d, seed);
  e1 = e1 / norm(e1);
  return {e1, cross(d, e1)};
}

// Component of v orthogonal to unit d.
Vec3 reject(Vec3 v, Vec3 d) { return v - dot(v, d) * d; }

double axis_param(const Line3& l, Vec3 p) { return dot(p - l.anchor, l.dir); }

double line_distance(const Line3& a, const Line3& b) {
  const Vec3 n = cross(a.dir, b.dir);
  const double s = norm(n);
  if (s < kParallelSin) return dist_point_line(a.anchor, b);
  return std::abs(dot(b.anchor - a.anchor, n)) / s;
}

double sin_angle(const Line3& a, const Line3& b) { return norm(cross(a.dir, b.dir)); }

bool in_union(const Cylinder& c1, const Cylinder& c2, Vec3 p) {
  return dist_point_line(p, c1.axis) <= c1.radius + kMemberTol || dist_point_line(p, c2.axis) <= c2.radius + kMemberTol;
}

// Feasibility interval of the slice parameter on the axis of `from`.
std::pair<double, double> core_interval(const Cylinder& from, const Cylinder& to, double tol) {
  const Vec3 n = cross(from.axis.dir, to.axis.dir);
  // Foot of the common perpendicular on `from`.
  const Vec3 w0 = from.axis.anchor - to.axis.anchor;
  const double b = dot(from.axis.dir, to.axis.dir);
  const double d = dot(from.axis.dir, w0);
  const double e = dot(to.axis.dir, w0);
  const double t0 = (b * e - d) / norm2(n);
  auto feasible = [&](double t) { return disk_to_axis_distance(from, t, to.axis) <= to.radius; };
  if (!feasible(t0)) throw DomainError("core_segment: cylinders do not intersect");

  auto extreme = [&](double sign) {
    double inside = t0;
    double step = 1.0;
    double outside = t0 + sign * step;
    while (feasible(outside)) {
      inside = outside;
      step *= 2.0;
      outside = t0 + sign * step;
    }
    while (std::abs(outside - inside) > tol) {
      const double mid = 0.5 * (inside + outside);
      (feasible(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  return {extreme(-1.0), extreme(1.0)};
}

}  // namespace

Polyline::Polyline(std::vector<Vec3> vertices) : v_(std::move(vertices)) {
  if (v_.size() < 2) throw DomainError("Polyline: needs at least two vertices");
  cum_.assign(v_.size(), 0.0);
  for (std::size_t k = 1; k < v_.size(); ++k) {
    const double len = norm(v_[k] - v_[k - 1]);
    if (len == 0.0) {
      std::ostringstream msg;
      msg << "Polyline: vertices " << k - 1 << " and " << k << " coincide";
      throw DomainError(msg.str());
    }
    cum_[k] = cum_[k - 1] + len;
  }
}

Vec3 Polyline::at(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * cum_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t k = static_cast<std::size_t>(it - cum_.begin());
  if (k >= cum_.size()) return v_.back();
  k = std::max<std::size_t>(k, 1);
  const double f = (s - cum_[k - 1]) / (cum_[k] - cum_[k - 1]);
  return v_[k - 1] + f * (v_[k] - v_[k - 1]);
}

double disk_to_axis_distance(const Cylinder& from, double t, const Line3& to) {
  const auto [e1, e2] = plane_basis(from.axis.dir);
  const double r = from.radius;
  // Minimize |c + M w|^2 over |w| <= r with c, M projected off `to`.
  const Vec3 c = reject(from.axis.at(t) - to.anchor, to.dir);
  const Vec3 m1 = reject(e1, to.dir);
  const Vec3 m2 = reject(e2, to.dir);
  const double a11 = dot(m1, m1), a12 = dot(m1, m2), a22 = dot(m2, m2);
  const double b1 = dot(m1, c), b2 = dot(m2, c);
  auto value = [&](double w1, double w2) { return norm2(c + w1 * m1 + w2 * m2); };

  double best = kInf;
  const double det = a11 * a22 - a12 * a12;
  if (det > 1e-14) {
    const double w1 = -(a22 * b1 - a12 * b2) / det;
    const double w2 = -(a11 * b2 - a12 * b1) / det;
    if (w1 * w1 + w2 * w2 <= r * r) best = value(w1, w2);
  }
  if (best == kInf) {
    auto on_circle = [&](double phi) { return value(r * std::cos(phi), r * std::sin(phi)); };
    constexpr int kSamples = 64;
    const double dphi = 2.0 * std::numbers::pi / kSamples;
    int arg = 0;
    double low = kInf;
    for (int k = 0; k < kSamples; ++k) {
      const double v = on_circle(k * dphi);
      if (v < low) low = v, arg = k;
    }
    const auto res = boost::math::tools::brent_find_minima(on_circle, (arg - 1) * dphi, (arg + 1) * dphi, 52);
    best = std::min(low, res.second);
  }
  return std::sqrt(std::max(best, 0.0));
}

CoreSegment core_segment(const Cylinder& c1, const Cylinder& c2, double tol) {
  if (sin_angle(c1.axis, c2.axis) <= kParallelSin) throw DomainError("core_segment: axes are parallel");
  if (line_distance(c1.axis, c2.axis) > c1.radius + c2.radius)
    throw DomainError("core_segment: cylinders do not intersect");
  CoreSegment out;
  const Cylinder* cyl[2] = {&c1, &c2};
  for (int m = 0; m < 2; ++m) {
    const auto [lo, hi] = core_interval(*cyl[m], *cyl[1 - m], tol);
    out.t_lo[m] = lo;
    out.t_hi[m] = hi;
    out.x[m] = cyl[m]->axis.at(lo);
    out.y[m] = cyl[m]->axis.at(hi);
  }
  return out;
}

double dist_point_segment(Vec3 p, Vec3 a, Vec3 b) {
  const Vec3 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return norm(p - a);
  const double f = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + f * ab));
}

double hausdorff_segments(Vec3 a0, Vec3 a1, Vec3 b0, Vec3 b1) {
  // Distance to a convex set is convex along a segment, so endpoints attain the max.
  return std::max({dist_point_segment(a0, b0, b1), dist_point_segment(a1, b0, b1), dist_point_segment(b0, a0, a1),
                   dist_point_segment(b1, a0, a1)});
}

double hausdorff_endpoint_sets(Vec3 a0, Vec3 a1, Vec3 b0, Vec3 b1) {
  auto d = [](Vec3 p, Vec3 q0, Vec3 q1) { return std::min(norm(p - q0), norm(p - q1)); };
  return std::max({d(a0, b0, b1), d(a1, b0, b1), d(b0, a0, a1), d(b1, a0, a1)});
}

double max_dist_to_line(const Polyline& eta, double t1, double t2, const Line3& l) {
  // Distance to a line is convex, so the max sits at a vertex or an end.
  double best = std::max(dist_point_line(eta.at(t1), l), dist_point_line(eta.at(t2), l));
  for (std::size_t k = 0; k < eta.vertices().size(); ++k) {
    const double t = eta.param(k);
    if (t > t1 && t < t2) best = std::max(best, dist_point_line(eta.vertices()[k], l));
  }
  return best;
}

namespace {

// Parameter intervals of eta inside the closed ball B(c, r).
void ball_visits(const Polyline& eta, Vec3 c, double r, std::vector<std::pair<double, double>>& out) {
  const auto& v = eta.vertices();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const Vec3 p = v[k] - c;
    const Vec3 dv = v[k + 1] - v[k];
    const double qa = norm2(dv), qb = dot(p, dv), qc = norm2(p) - r * r;
    const double disc = qb * qb - qa * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    const double s0 = std::max((-qb - sq) / qa, 0.0);
    const double s1 = std::min((-qb + sq) / qa, 1.0);
    if (s0 > s1) continue;
    const double t0 = eta.param(k), t1 = eta.param(k + 1);
    out.emplace_back(t0 + s0 * (t1 - t0), t0 + s1 * (t1 - t0));
  }
}

// Closures of the maximal parameter intervals avoiding both balls.
std::vector<std::pair<double, double>> free_intervals(const Polyline& eta, Vec3 x1, Vec3 y1, double r) {
  std::vector<std::pair<double, double>> in;
  ball_visits(eta, x1, r, in);
  ball_visits(eta, y1, r, in);
  std::sort(in.begin(), in.end());
  std::vector<std::pair<double, double>> out;
  double cur = 0.0;
  for (const auto& [a, b] : in) {
    if (a > cur) out.emplace_back(cur, a);
    cur = std::max(cur, b);
  }
  if (cur < 1.0) out.emplace_back(cur, 1.0);
  return out;
}

}  // namespace

TubeResult tube_from_two_cylinders(const Cylinder& c1, const Cylinder& c2, const Polyline& eta, double a0) {
  if (c1.radius > 1.0 || c2.radius > 1.0) throw DomainError("tube: cylinder radii must be <= 1");
  const auto& v = eta.vertices();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!in_union(c1, c2, v[k])) {
      std::ostringstream msg;
      msg << "tube: vertex " << k << " (" << v[k].x << ", " << v[k].y << ", " << v[k].z << ") is outside C1 u C2";
      throw DomainError(msg.str());
    }
    if (k + 1 < v.size() && !in_union(c1, c2, 0.5 * (v[k] + v[k + 1]))) {
      std::ostringstream msg;
      msg << "tube: midpoint of edge " << k << "-" << k + 1 << " is outside C1 u C2";
      throw DomainError(msg.str());
    }
  }
  if (norm(v.back() - v.front()) < a0 / 10.0) throw DomainError("tube: endpoints closer than a0/10");

  TubeResult res;
  if (line_distance(c1.axis, c2.axis) > c1.radius + c2.radius) {
    // A connected curve in two disjoint closed sets stays in one of them.
    const bool first = dist_point_line(v.front(), c1.axis) <= c1.radius + kMemberTol;
    res.axis = first ? c1.axis : c2.axis;
    res.axis_index = first ? 1 : 2;
    res.branch = "disjoint";
    return res;
  }
  if (sin_angle(c1.axis, c2.axis) <= kParallelSin) {
    res.axis = c1.axis;
    res.branch = "parallel";
    return res;
  }

  const CoreSegment core = core_segment(c1, c2);
  auto intervals = free_intervals(eta, core.x[0], core.y[0], 5.0);
  auto disp = [&](const std::pair<double, double>& iv) { return norm(eta.at(iv.second) - eta.at(iv.first)); };
  std::sort(intervals.begin(), intervals.end(), [&](const auto& a, const auto& b) { return disp(a) > disp(b); });
  for (const auto& iv : intervals) {
    if (disp(iv) < a0 / 100.0) break;
    for (int m = 1; m <= 2; ++m) {
      const Line3& l = m == 1 ? c1.axis : c2.axis;
      if (max_dist_to_line(eta, iv.first, iv.second, l) <= 4.0 + kMemberTol) {
        res.axis = l;
        res.axis_index = m;
        res.t1 = iv.first;
        res.t2 = iv.second;
        res.branch = "core";
        return res;
      }
    }
  }
  throw DomainError("tube: no free interval qualifies (a0 below the lemma's regime?)");
}

namespace {

Vec3 disk_point(Rng& rng, const Line3& axis, double t, double r) {
  const auto [e1, e2] = plane_basis(axis.dir);
  const Vec2 w = rng.disk(r * (1.0 - 1e-9));
  return axis.at(t) + w.x * e1 + w.y * e2;
}

// Random point of C1 n C2 sliced along the axis of c1 within [lo, hi].
Vec3 common_point(Rng& rng, const Cylinder& c1, const Cylinder& c2, double lo, double hi) {
  for (int k = 0; k < 100000; ++k) {
    const Vec3 p = disk_point(rng, c1.axis, rng.uniform(lo, hi), c1.radius);
    if (dist_point_line(p, c2.axis) < c2.radius * (1.0 - 1e-9)) return p;
  }
  // Point on the common perpendicular splitting the gap by radius.
  const double t = 0.5 * (lo + hi);
  const Vec3 f1 = c1.axis.at(t);
  const Vec3 f2 = closest_point_on_line(f1, c2.axis);
  return f1 + (c1.radius / (c1.radius + c2.radius)) * (f2 - f1);
}

// Vertices along an axis from parameter t_from to t_to, excluding the start.
void walk_along(Rng& rng, const Cylinder& c, double t_from, double t_to, std::vector<Vec3>& out) {
  const double sign = t_to > t_from ? 1.0 : -1.0;
  double t = t_from;
  while (true) {
    t += sign * rng.uniform(1.0, 30.0);
    if ((t - t_to) * sign >= 0.0) break;
    out.push_back(disk_point(rng, c.axis, t, c.radius));
  }
  out.push_back(disk_point(rng, c.axis, t_to, c.radius));
}

std::vector<Vec3> dedupe(std::vector<Vec3> v) {
  std::vector<Vec3> out;
  for (const Vec3& p : v)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  return out;
}

}  // namespace

std::pair<Cylinder, Cylinder> random_intersecting_pair(Rng& rng) {
  while (true) {
    const double r1 = rng.uniform() < 0.5 ? 1.0 : rng.uniform(0.5, 1.0);
    const double r2 = rng.uniform() < 0.5 ? 1.0 : rng.uniform(0.5, 1.0);
    const Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Vec3 d1 = rng.unit_vector();
    Vec3 d2 = rng.unit_vector();
    // Some nearly parallel pairs, where the core is long.
    if (rng.uniform() < 0.1) d2 = d1 + rng.uniform(1e-4, 0.05) * rng.unit_vector();
    const Vec3 n = cross(d1, d2);
    if (norm(n) < 1e-5) continue;
    const double gap = rng.uniform(0.0, 0.999) * (r1 + r2);
    const Cylinder c1(Line3::through(p, d1), r1);
    const Cylinder c2(Line3::through(p + gap * (n / norm(n)), d2), r2);
    return {c1, c2};
  }
}

TubeInstance random_tube_instance(Rng& rng, double a0) {
  while (true) {
    TubeInstance inst;
    inst.a0 = a0;
    const double r1 = rng.uniform() < 0.8 ? 1.0 : rng.uniform(0.5, 1.0);
    const double r2 = rng.uniform() < 0.8 ? 1.0 : rng.uniform(0.5, 1.0);
    const Vec3 p1{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
    inst.c1 = Cylinder(Line3::through(p1, rng.unit_vector()), r1);
    const auto [e1, e2] = plane_basis(inst.c1.axis.dir);
    const double kind = rng.uniform();
    const double L = a0 * rng.uniform(0.3, 1.0);
    std::vector<Vec3> v;

    if (kind < 0.7) {
      const double gap = rng.uniform(0.0, 0.98) * (r1 + r2);
      const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3 foot = inst.c1.axis.at(rng.uniform(-20, 20)) + gap * (std::cos(ang) * e1 + std::sin(ang) * e2);
      Vec3 d2 = rng.unit_vector();
      if (rng.uniform() < 0.2) d2 = inst.c1.axis.dir + rng.uniform(0.001, 0.1) * rng.unit_vector();
      // Keep the foot on the common perpendicular so the axes are at distance `gap`.
      d2 = d2 - dot(d2, std::cos(ang) * e1 + std::sin(ang) * e2) * (std::cos(ang) * e1 + std::sin(ang) * e2);
      if (norm(cross(d2 / norm(d2), inst.c1.axis.dir)) < 1e-3) continue;
      inst.c2 = Cylinder(Line3::through(foot, d2), r2);
      CoreSegment core;
      try {
        core = core_segment(inst.c1, inst.c2);
      } catch (const DomainError&) {
        continue;
      }
      const Cylinder* cyl[2] = {&inst.c1, &inst.c2};
      auto core_pt = [&] { return common_point(rng, inst.c1, inst.c2, core.t_lo[0], core.t_hi[0]); };
      auto mid = [&](int m) { return 0.5 * (core.t_lo[m] + core.t_hi[m]); };

      const int in = rng.uniform() < 0.5 ? 0 : 1;
      const double s_in = rng.uniform() < 0.5 ? -1.0 : 1.0;
      v.push_back(disk_point(rng, cyl[in]->axis, mid(in) + s_in * L, cyl[in]->radius));
      Vec3 cur = core_pt();
      walk_along(rng, *cyl[in], mid(in) + s_in * L, axis_param(cyl[in]->axis, cur), v);
      v.back() = cur;
      const int excursions = static_cast<int>(rng.uniform() * 4.0);
      for (int k = 0; k < excursions; ++k) {
        const int m = rng.uniform() < 0.5 ? 0 : 1;
        const double t0 = axis_param(cyl[m]->axis, cur);
        walk_along(rng, *cyl[m], t0, t0 + (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(5.0, 200.0), v);
        cur = core_pt();
        walk_along(rng, *cyl[m], axis_param(cyl[m]->axis, v.back()), axis_param(cyl[m]->axis, cur), v);
        v.back() = cur;
        const int zig = static_cast<int>(rng.uniform() * 4.0);
        for (int z = 0; z < zig; ++z) v.push_back(core_pt());
        cur = v.back();
      }
      const int out = rng.uniform() < 0.5 ? 0 : 1;
      const double s_out = rng.uniform() < 0.5 ? -1.0 : 1.0;
      walk_along(rng, *cyl[out], axis_param(cyl[out]->axis, cur), mid(out) + s_out * a0 * rng.uniform(0.3, 1.0), v);
    } else if (kind < 0.85) {
      const double gap = rng.uniform(0.0, 0.95) * (r1 + r2);
      const Vec3 shift = gap * e1;
      inst.c2 = Cylinder(Line3::through(inst.c1.axis.anchor + shift, inst.c1.axis.dir), r2);
      auto both = [&](double t) {
        for (int k = 0; k < 100000; ++k) {
          const Vec3 p = disk_point(rng, inst.c1.axis, t, r1);
          if (dist_point_line(p, inst.c2.axis) < r2 * (1.0 - 1e-9)) return p;
        }
        return inst.c1.axis.at(t) + (r1 / (r1 + r2)) * shift;
      };
      const double t_end = L * 1.2;
      double t = -t_end;
      v.push_back(both(t));
      int side = 0;
      while (t < t_end) {
        t += rng.uniform(0.5, 20.0);
        const Cylinder& c = side == 0 ? inst.c1 : inst.c2;
        v.push_back(disk_point(rng, c.axis, axis_param(c.axis, inst.c1.axis.at(t)), c.radius));
        t += rng.uniform(0.5, 20.0);
        v.push_back(both(t));
        side = rng.uniform() < 0.5 ? 0 : 1;
      }
    } else {
      const double gap = rng.uniform(r1 + r2 + 0.1, 50.0);
      inst.c2 = Cylinder(Line3::through(inst.c1.axis.anchor + gap * e2, rng.unit_vector()), r2);
      if (line_distance(inst.c1.axis, inst.c2.axis) <= r1 + r2 + 0.05) continue;
      const Cylinder& c = rng.uniform() < 0.5 ? inst.c1 : inst.c2;
      const double t0 = rng.uniform(-L, 0.0);
      v.push_back(disk_point(rng, c.axis, t0, c.radius));
      walk_along(rng, c, t0, t0 + L, v);
    }
    v = dedupe(std::move(v));
    if (v.size() < 2 || norm(v.back() - v.front()) < a0 / 10.0) continue;
    inst.vertices = std::move(v);
    return inst;
  }
}

TubeInstance parse_tube_instance(const std::string& line) {
  std::istringstream in(line);
  auto next = [&] {
    double x;
    if (!(in >> x)) throw DomainError("tube corpus: truncated line");
    return x;
  };
  auto vec = [&] {
    const double x = next(), y = next(), z = next();
    return Vec3{x, y, z};
  };
  TubeInstance inst;
  for (Cylinder* c : {&inst.c1, &inst.c2}) {
    const Vec3 a = vec();
    const Vec3 d = vec();
    const double r = next();
    *c = Cylinder(Line3::through(a, d), r);
  }
  const double n = next();
  if (n < 2 || n != std::floor(n)) throw DomainError("tube corpus: bad vertex count");
  for (int k = 0; k < static_cast<int>(n); ++k) inst.vertices.push_back(vec());
  inst.a0 = next();
  std::string rest;
  if (in >> rest) throw DomainError("tube corpus: trailing fields");
  return inst;
}

std::string format_tube_instance(const TubeInstance& inst) {
  std::ostringstream out;
  out.precision(17);
  auto vec = [&](Vec3 p) { out << p.x << ' ' << p.y << ' ' << p.z << ' '; };
  for (const Cylinder* c : {&inst.c1, &inst.c2}) {
    vec(c->axis.anchor);
    vec(c->axis.dir);
    out << c->radius << ' ';
  }
  out << inst.vertices.size() << ' ';
  for (const Vec3& p : inst.vertices) vec(p);
  out << inst.a0;
  return out.str();
}

double horizon_line(double theta, double offset, double padding, double max_len, bool& unbounded,
                    const HexTiling& tiling) {
  constexpr double kEps = 1e-3;
  const Vec2 e{std::cos(theta), std::sin(theta)};
  const Vec2 base = offset * perp(e);
  auto dist = [&](double s) { return tiling.dist_to_boundary(base + s * e); };

  // First point after a (inside) where the line leaves the band, towards b;
  // +inf if [a, b] stays inside. Uses the 1-Lipschitz bound on the max.
  auto first_exit = [&](auto&& self, double a, double da, double b, double db) -> double {
    const double len = std::abs(b - a);
    if (0.5 * (da + db + len) <= padding) return kInf;
    if (len < kEps) return db > padding ? b : kInf;
    const double m = 0.5 * (a + b);
    const double dm = dist(m);
    const double r = self(self, a, da, m, dm);
    if (r != kInf) return r;
    return self(self, m, dm, b, db);
  };
  // Extent of the run containing s in direction sign, capped at max_len.
  auto run_end = [&](double s, double sign, double cap_from) {
    double t = s, dt = dist(s);
    while (true) {
      const double nxt = t + sign;
      const double dn = dist(nxt);
      const double ex = first_exit(first_exit, t, dt, nxt, dn);
      if (ex != kInf) return ex;
      t = nxt;
      dt = dn;
      if (std::abs(t - cap_from) > max_len) {
        unbounded = true;
        return t;
      }
    }
  };

  const double W = max_len;
  double best = 0.0;
  double s = -W;
  bool first = true;
  while (s < W) {
    const double d = dist(s);
    if (d > padding) {
      s += std::max(d - padding, kEps);
      first = false;
      continue;
    }
    double start = s;
    if (first) {
      start = run_end(s, -1.0, s);
      if (unbounded) return kInf;
    }
    first = false;
    const double end = run_end(s, 1.0, start);
    if (unbounded) return kInf;
    best = std::max(best, end - start);
    s = end + kEps;
  }
  return best;
}

HorizonResult horizon_scan(double padding, int directions, int offsets, double max_len, const HexTiling& tiling) {
  if (directions < 1 || offsets < 2) throw DomainError("horizon_scan: need directions >= 1 and offsets >= 2");
  HorizonResult res;
  const auto verts = tiling.central_vertices();
  for (int k = 0; k < directions; ++k) {
    const double theta = k * std::numbers::pi / directions;
    const Vec2 n = perp(Vec2{std::cos(theta), std::sin(theta)});
    double w = 0.0;
    for (const Vec2& p : verts) w = std::max(w, std::abs(dot(p, n)));
    for (int j = 0; j < offsets; ++j) {
      const double c = -w + 2.0 * w * j / (offsets - 1);
      bool unb = false;
      const double len = horizon_line(theta, c, padding, max_len, unb, tiling);
      if (unb) {
        res.unbounded = true;
        res.max_free = kInf;
        res.theta = theta;
        res.offset = c;
        return res;
      }
      if (len > res.max_free) {
        res.max_free = len;
        res.theta = theta;
        res.offset = c;
      }
    }
  }
  return res;
}

bool blocking_check(const Cylinder& c1, const Cylinder& c2, Vec2 x0, double a0, double h) {
  if (a0 < 1e5) throw DomainError("blocking_check: a0 must be >= 1e5");
  if (c1.radius != 1.0 || c2.radius != 1.0) throw DomainError("blocking_check: unit cylinders only");
  const LineSample s = fixed_sample(Window::disk_slab(x0, a0), {c1.axis, c2.axis});
  return !obstacle_crossing(s, x0, a0, h);
}

double max_axis_F_displacement(const Cylinder& c, Vec2 x0, double a0, double h) {
  double best = 0.0;
  const auto comps = trace_cylinder_on_H(c.axis, x0, a0, h);
  for (const auto& comp : comps)
    for (const Cell& cell : comp.cells) {
      const Vec3 p = lift_to_H(comp.grid.center(cell.i, cell.j));
      const Vec3 q = closest_point_on_line(p, c.axis);
      best = std::max(best, norm(map_F(q) - q));
    }
  return best;
}

std::pair<Cylinder, Cylinder> random_adversarial_pair(Rng& rng, Vec2 x0, double a0) {
  auto jitter = [&](const Line3& l) {
    const Vec2 dxy = rng.disk(1.0);
    const Vec3 a = l.anchor + Vec3{dxy.x, dxy.y, rng.uniform(0.0, 2.0)};
    const Vec3 d = l.dir + 0.01 * rng.unit_vector();
    return Line3::through(a, d);
  };
  if (rng.uniform() < 0.3) {
    // Long horizontal lines crossing the face around x0 at low height.
    const HexTiling tiling;
    auto random_horizontal = [&] {
      Vec2 p;
      do p = rng.disk(tiling.circumradius());
      while (!tiling.in_central_face(p));
      const double phi = rng.uniform(0.0, std::numbers::pi);
      const Vec2 c = tiling.nearest_center(x0);
      return Line3::through({c.x + p.x, c.y + p.y, rng.uniform(0.0, 3.0)}, {std::cos(phi), std::sin(phi), 0.0});
    };
    return {Cylinder(random_horizontal()), Cylinder(random_horizontal())};
  }
  const auto& names = pair_family_names();
  const auto& name = names[static_cast<std::size_t>(rng.uniform() * static_cast<double>(names.size()))];
  const auto pairs = line_pair_family(name, x0, a0);
  const auto& pr = pairs[static_cast<std::size_t>(rng.uniform() * static_cast<double>(pairs.size()))];
  return {Cylinder(jitter(pr.first)), Cylinder(jitter(pr.second))};
}

}  // namespace cylperc
