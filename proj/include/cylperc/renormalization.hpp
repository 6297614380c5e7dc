#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "cylperc/geometry.hpp"
#include "cylperc/stats.hpp"

namespace cylperc {

using BigFloat = boost::multiprecision::cpp_dec_float_50;
using Rational = boost::multiprecision::cpp_rational;

BigFloat to_big(const Rational& q);

// a_n = a0^(gamma^n) with gamma = 7/6.
class ScaleSequence {
 public:
  // Outside desk mode a0 >= 288^6 is required; in desk mode a0 >= 8000.
  ScaleSequence(const BigFloat& a0, bool desk_mode);
  static ScaleSequence desk(double a0) { return ScaleSequence(BigFloat(a0), true); }

  const BigFloat& a0() const { return a0_; }
  bool desk_mode() const { return desk_; }
  static Rational gamma() { return Rational(7, 6); }
  static Rational gamma_pow(int n);

  // Throws ResourceLimit naming the exact exponent when a_n leaves the
  // extended range.
  BigFloat scale(int n) const;
  // Throws ResourceLimit when a_n exceeds the double range.
  double scale_double(int n) const;
  // a_{n+1} >= 288 a_n.
  bool ratio_288_holds(int n) const;

 private:
  BigFloat a0_;
  bool desk_;
};

// Shape of the face swept by the sphere centers.
enum class FaceModel { Hexagon, Point };

struct CoveringSet {
  int n = 0;
  int i = 0;
  double spacing = 0.0;  // a_{n-1} / 10
  double rho = 0.0;      // a_{n-1}
  double radius = 0.0;   // (i + 1) a_n / 6
  FaceModel face = FaceModel::Hexagon;
  std::vector<Vec2> points;
  std::vector<std::pair<std::int64_t, std::int64_t>> indices;  // points = spacing * indices

  // Whether some covering point lies within `spacing` of y.
  bool covers_point(Vec2 y) const;
};

// Whether S(x, rho) meets the union of the circles of radius R centered on the face.
bool covering_predicate(Vec2 x, double rho, double R, FaceModel face, const HexTiling& tiling = HexTiling());

CoveringSet build_covering(const ScaleSequence& seq, int n, int i, FaceModel face = FaceModel::Hexagon,
                           const HexTiling& tiling = HexTiling());

// Distance from the origin to the projected axis; a vertical axis projects
// to a point, and the line through that point and the origin is used.
double projected_axis_distance(const Line3& axis);
// Whether distance d avoids the tangency band of index i at scale a_n.
bool secant_allowed(double d, int i, double an);
std::pair<int, int> select_secant_indices(const ScaleSequence& seq, int n, const Cylinder& c1, const Cylinder& c2);

std::size_t count_touched(const CoveringSet& cov, const Cylinder& c1, const Cylinder& c2);

double annulus_chord_length(double d, double R, double eps);

std::vector<Vec2> default_x_points(const HexTiling& tiling = HexTiling());

struct ScaleEstimate {
  EstimateWithCI best;
  std::vector<EstimateWithCI> per_point;
  std::size_t best_point = 0;
  std::size_t best_pair = 0;
  // The sup over the face is replaced by a max over x_points.
  bool sup_is_proxy = true;
};

ScaleEstimate estimate_pn(const ScaleSequence& seq, int n, double u, const std::vector<Vec2>& x_points,
                          std::size_t reps, std::uint64_t seed, double h = 0.5, unsigned threads = 1);

// Deterministic line pairs of a named family around x0 at scale a.
std::vector<std::pair<Line3, Line3>> line_pair_family(const std::string& name, Vec2 x0, double a,
                                                      const HexTiling& tiling = HexTiling());
const std::vector<std::string>& pair_family_names();

ScaleEstimate estimate_qn(const ScaleSequence& seq, int n, double u, const std::string& family, std::size_t reps,
                          std::uint64_t seed, const std::vector<Vec2>& x_points, double h = 0.5,
                          unsigned threads = 1);

std::pair<BigFloat, BigFloat> recursion_rhs(const BigFloat& p_prev, const BigFloat& q_prev, const ScaleSequence& seq,
                                            int n, const BigFloat& c_p, const BigFloat& c_q);

struct InductionCheck {
  Rational p_exponent;        // 3(1/gamma - 1) + 1/168
  Rational p_target;          // (5/2)(1 - gamma)
  Rational q_exponent;        // 2(1/gamma - 1) + 1/168
  Rational q_target;          // (3/2)(1 - gamma)
  bool exponents_ok = false;
  bool scale_ok = false;      // a0_hat >= 288^6
  bool absorption_ok = false; // a0_hat^(1/168) >= 8 max(c_p, c_q)
  bool ok() const { return exponents_ok && scale_ok && absorption_ok; }
};

InductionCheck induction_step_details(const BigFloat& a0_hat, double c_p = 1.0, double c_q = 1.0);
bool check_induction_step(const BigFloat& a0_hat, double c_p = 1.0, double c_q = 1.0);
// 288^6 max (8 max(c_p, c_q))^168.
BigFloat induction_scale(double c_p, double c_q);

struct RecursionTrace {
  std::vector<BigFloat> p, q, p_threshold, q_threshold;
  bool below_thresholds = true;
};

// Iterates recursion_rhs from the thresholds at level 0 for n = 1..levels.
RecursionTrace iterate_recursion(const BigFloat& a0_hat, int levels, double c_p = 1.0, double c_q = 1.0);

BigFloat tail_bound(const BigFloat& a0_hat, int k0);
// Smallest k0 >= 1 with tail_bound < target, or -1 if none up to max_k0.
int tail_k0(const BigFloat& a0_hat, const BigFloat& target, int max_k0 = 64);

}  // namespace cylperc
