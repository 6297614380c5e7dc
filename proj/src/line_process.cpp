#include "cylperc/line_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cylperc/errors.hpp"

namespace cylperc {

Window Window::ball(Vec3 center, double r) {
  if (!(r >= 0.0)) throw DomainError("Window::ball: radius must be >= 0");
  Window w;
  w.kind_ = Kind::Ball;
  w.center_ = center;
  w.radius_ = r;
  return w;
}

Window Window::disk_slab(Vec2 center, double s, double z0, double z1) {
  if (!(s > 0.0)) throw DomainError("Window::disk_slab: disk radius must be positive");
  if (!(z1 >= z0)) throw DomainError("Window::disk_slab: empty height interval");
  Window w;
  w.kind_ = Kind::DiskSlab;
  w.center_ = {center.x, center.y, 0.5 * (z0 + z1)};
  w.radius_ = s;
  w.z0_ = z0;
  w.z1_ = z1;
  return w;
}

Vec3 Window::enclosing_center() const { return center_; }

double Window::enclosing_radius() const {
  if (kind_ == Kind::Ball) return radius_;
  return std::hypot(radius_, 0.5 * (z1_ - z0_));
}

double Window::distance(Vec3 p) const {
  if (kind_ == Kind::Ball) return std::max(0.0, norm(p - center_) - radius_);
  const double radial = std::max(0.0, std::hypot(p.x - center_.x, p.y - center_.y) - radius_);
  const double vertical = std::max({0.0, z0_ - p.z, p.z - z1_});
  return std::hypot(radial, vertical);
}

namespace {

// Whether the set `inner` lies inside the set `outer`, up to tol.
bool contained(const Window& inner, const Window& outer, double tol) {
  const Vec3 ci = inner.center();
  const Vec3 co = outer.center();
  const double horiz = std::hypot(ci.x - co.x, ci.y - co.y);
  if (outer.kind() == Window::Kind::Ball) {
    if (inner.kind() == Window::Kind::Ball) return norm(ci - co) + inner.radius() <= outer.radius() + tol;
    const double dz = std::max(std::abs(inner.z0() - co.z), std::abs(inner.z1() - co.z));
    return std::hypot(horiz + inner.radius(), dz) <= outer.radius() + tol;
  }
  if (inner.kind() == Window::Kind::Ball)
    return horiz + inner.radius() <= outer.radius() + tol && ci.z - inner.radius() >= outer.z0() - tol &&
           ci.z + inner.radius() <= outer.z1() + tol;
  return horiz + inner.radius() <= outer.radius() + tol && inner.z0() >= outer.z0() - tol &&
         inner.z1() <= outer.z1() + tol;
}

}  // namespace

bool covers(const Window& sample_window, const Window& query) {
  const double rs = sample_window.enclosing_radius();
  const double tol = kGeomTol * std::max(1.0, rs);
  if (contained(query, sample_window, tol)) return true;
  const double gap = norm(query.enclosing_center() - sample_window.enclosing_center()) + query.enclosing_radius();
  return gap <= rs + tol;
}

LineSample fixed_sample(const Window& w, std::vector<Line3> lines) {
  LineSample s;
  s.window = w;
  s.lines = std::move(lines);
  return s;
}

double mu_lines_hitting_ball(double r) {
  if (!(r >= 0.0)) throw DomainError("mu_lines_hitting_ball: negative radius");
  return std::numbers::pi * r * r;
}

double mu_cylinders_hitting(const Window& w) {
  if (w.kind() != Window::Kind::Ball)
    throw DomainError("mu_cylinders_hitting: closed form only for balls; use estimate_mu_hitting");
  return mu_lines_hitting_ball(w.radius() + 1.0);
}

namespace {

void orthonormal_basis(Vec3 d, Vec3& e1, Vec3& e2) {
  const Vec3 helper = std::abs(d.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  e1 = cross(d, helper);
  e1 = e1 / norm(e1);
  e2 = cross(d, e1);
}

}  // namespace

Line3 random_line_hitting_ball(Rng& rng, Vec3 center, double R) {
  const Vec3 d = rng.unit_vector();
  Vec3 e1, e2;
  orthonormal_basis(d, e1, e2);
  const Vec2 off = rng.disk(R);
  return Line3::through(center + off.x * e1 + off.y * e2, d);
}

LineSample sample_poisson(double u, const Window& w, std::uint64_t seed) {
  if (!(u >= 0.0)) throw DomainError("sample_poisson: intensity must be >= 0");
  LineSample s;
  s.u = u;
  s.window = w;
  s.seed = seed;
  const double R = w.enclosing_radius() + 1.0;
  const double mass = mu_lines_hitting_ball(R);
  const double expected = u * mass;
  if (expected > 5e7) throw ResourceLimit("sample_poisson: expected line count exceeds 5e7");
  s.lines.reserve(static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected) + 8.0));
  Rng rng(seed);
  const Vec3 c = w.enclosing_center();
  double mark = 0.0;
  for (;;) {
    mark += rng.exponential() / mass;
    if (mark > u) break;
    s.lines.push_back(random_line_hitting_ball(rng, c, R));
  }
  return s;
}

namespace {

// Intersects [lo, hi] with {t : q(t) = A t^2 + B t + C <= 0}, A >= 0.
bool clip_quadratic(double A, double B, double C, double& lo, double& hi) {
  if (A <= 0.0) {
    if (B == 0.0) return C <= 0.0;
    const double t = -C / B;
    if (B > 0.0) hi = std::min(hi, t);
    else lo = std::max(lo, t);
    return lo <= hi;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  // Numerically stable roots.
  const double q = -0.5 * (B + std::copysign(sq, B));
  double r1 = q / A;
  double r2 = q != 0.0 ? C / q : -B / (2.0 * A);
  if (r1 > r2) std::swap(r1, r2);
  lo = std::max(lo, r1);
  hi = std::min(hi, r2);
  return lo <= hi;
}

}  // namespace

bool hits_region(const Line3& l, const Window& w, double radius) {
  const Vec3 c = w.enclosing_center();
  const double reach = w.enclosing_radius() + radius;
  if (dist_point_line(c, l) > reach + kGeomTol) return false;
  if (w.kind() == Window::Kind::Ball) return dist_point_line(c, l) <= w.radius() + radius;

  // Bracket the parameters where l(t) can be within `radius` of the slab.
  const double tc = dot(c - l.anchor, l.dir);
  double lo = tc - reach - 1.0;
  double hi = tc + reach + 1.0;
  const Vec3& a = l.anchor;
  const Vec3& d = l.dir;
  if (d.z != 0.0) {
    double t1 = (w.z0() - radius - a.z) / d.z;
    double t2 = (w.z1() + radius - a.z) / d.z;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  } else if (a.z < w.z0() - radius || a.z > w.z1() + radius) {
    return false;
  }
  if (lo > hi) return false;
  const double rr = w.radius() + radius;
  const Vec2 p{a.x - c.x, a.y - c.y};
  const Vec2 dh{d.x, d.y};
  if (!clip_quadratic(norm2(dh), 2.0 * dot(p, dh), norm2(p) - rr * rr, lo, hi)) return false;

  // The distance to a convex set is convex along the line.
  auto f = [&](double t) { return w.distance(l.at(t)); };
  if (f(lo) <= radius || f(hi) <= radius) return true;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-9) {
    if (f1 <= radius || f2 <= radius) return true;
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2) <= radius;
}

std::size_t count_hitting_both(const LineSample& s, const Window& w1, const Window& w2) {
  if (!covers(s.window, w1) || !covers(s.window, w2))
    throw CoverageError("count_hitting_both: window not covered by the sample");
  std::size_t k = 0;
  for (const Line3& l : s.lines)
    if (hits_region(l, w1) && hits_region(l, w2)) ++k;
  return k;
}

namespace {

Estimate proportion_times_mass(std::size_t hits, std::size_t n, double mass) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {mass * p, mass * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace

Estimate estimate_mu_hitting(const Window& w, std::size_t n, std::uint64_t seed) {
  return estimate_mu_hitting_both(w, w, n, seed);
}

Estimate estimate_mu_hitting_both(const Window& w1, const Window& w2, std::size_t n, std::uint64_t seed) {
  if (n < 1000) throw DomainError("estimate_mu_hitting_both: need n >= 1000");
  // A line meeting both windows meets the smaller one's enlarged enclosing
  // ball, so proposing from that ball is unbiased and much tighter.
  const Window& small = w1.enclosing_radius() <= w2.enclosing_radius() ? w1 : w2;
  const Window& other = &small == &w1 ? w2 : w1;
  const double R = small.enclosing_radius() + 1.0;
  const Vec3 c = small.enclosing_center();
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Line3 l = random_line_hitting_ball(rng, c, R);
    if (hits_region(l, small) && hits_region(l, other)) ++hits;
  }
  return proportion_times_mass(hits, n, mu_lines_hitting_ball(R));
}

bool point_vacant(const LineSample& s, Vec3 p) {
  if (!covers(s.window, Window::ball(p, 0.0))) throw CoverageError("point_vacant: point outside sample coverage");
  for (const Line3& l : s.lines)
    if (dist_point_line(p, l) <= 1.0) return false;
  return true;
}

CovarianceEstimate covariance_estimate(Vec3 x, Vec3 y, double u, std::size_t reps, std::uint64_t seed,
                                       std::size_t mu_lines) {
  if (reps < 10000) throw DomainError("covariance_estimate: need reps >= 1e4");
  // Only lines within distance 1 of x or y matter: sample those near x, then
  // those near y that miss x.
  const Window wx = Window::ball(x, 0.0), wy = Window::ball(y, 0.0);
  std::vector<unsigned char> vx(reps), vy(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const LineSample sx = sample_poisson(u, wx, derive_seed(seed, 2 * r));
    const LineSample sy = sample_poisson(u, wy, derive_seed(seed, 2 * r + 1));
    vx[r] = sx.lines.empty();
    bool free_y = true;
    for (const Line3& l : sx.lines) free_y = free_y && dist_point_line(y, l) > 1.0;
    for (const Line3& l : sy.lines) free_y = free_y && dist_point_line(x, l) <= 1.0;
    vy[r] = free_y;
  }
  const double n = static_cast<double>(reps);
  double mx = 0, my = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    mx += vx[r];
    my += vy[r];
  }
  mx /= n;
  my /= n;
  RunningStats z;
  for (std::size_t r = 0; r < reps; ++r) z.add((vx[r] - mx) * (vy[r] - my));

  CovarianceEstimate out;
  out.mc = {z.mean() * n / (n - 1.0), z.stderr_of_mean()};
  out.mu_xy = estimate_mu_hitting_both(Window::ball(x, 0.0), Window::ball(y, 0.0), mu_lines,
                                       derive_seed(seed, ~std::uint64_t{0}));
  const double base = std::exp(-2.0 * u * std::numbers::pi);
  out.semi_analytic = {base * std::expm1(u * out.mu_xy.value), base * std::exp(u * out.mu_xy.value) * u * out.mu_xy.se};
  return out;
}

}  // namespace cylperc
