#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cylperc/geometry.hpp"
#include "cylperc/rng.hpp"
#include "cylperc/stats.hpp"

namespace cylperc {

// Ball in R^3, or a vertical cylinder S(center2, s) x [z0, z1].
class Window {
 public:
  enum class Kind { Ball, DiskSlab };

  // r = 0 is allowed and stands for a single point.
  static Window ball(Vec3 center, double r);
  static Window disk_slab(Vec2 center, double s, double z0 = 0.0, double z1 = kSlabHeight);

  Kind kind() const { return kind_; }
  Vec3 center() const { return center_; }
  double radius() const { return radius_; }
  double z0() const { return z0_; }
  double z1() const { return z1_; }

  Vec3 enclosing_center() const;
  double enclosing_radius() const;
  double distance(Vec3 p) const;

 private:
  Kind kind_ = Kind::Ball;
  Vec3 center_;
  double radius_ = 0.0;
  double z0_ = 0.0;
  double z1_ = 0.0;
};

// True when every line whose unit cylinder meets `query` also meets the
// +1-enlarged enclosing ball of `sample_window`.
bool covers(const Window& sample_window, const Window& query);

struct LineSample {
  double u = 0.0;
  Window window;
  std::vector<Line3> lines;
  std::uint64_t seed = 0;
};

// Sample holding exactly the given lines (u = 0).
LineSample fixed_sample(const Window& w, std::vector<Line3> lines);

double mu_lines_hitting_ball(double r);
// Ball windows only; other kinds throw DomainError.
double mu_cylinders_hitting(const Window& w);

// Draws one line uniformly from the lines meeting B(center, R).
Line3 random_line_hitting_ball(Rng& rng, Vec3 center, double R);

// Lines of the returned sample are the Poisson arrivals with mark <= u, so
// a fixed seed yields samples nested in u.
LineSample sample_poisson(double u, const Window& w, std::uint64_t seed);

// Whether the cylinder of the given radius around l meets w.
bool hits_region(const Line3& l, const Window& w, double radius = 1.0);

std::size_t count_hitting_both(const LineSample& s, const Window& w1, const Window& w2);

Estimate estimate_mu_hitting(const Window& w, std::size_t n, std::uint64_t seed);
Estimate estimate_mu_hitting_both(const Window& w1, const Window& w2, std::size_t n, std::uint64_t seed);

bool point_vacant(const LineSample& s, Vec3 p);

struct CovarianceEstimate {
  Estimate mc;
  Estimate semi_analytic;
  Estimate mu_xy;
};

CovarianceEstimate covariance_estimate(Vec3 x, Vec3 y, double u, std::size_t reps, std::uint64_t seed,
                                       std::size_t mu_lines = 4'000'000);

}  // namespace cylperc
