#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "cylperc/errors.hpp"
#include "cylperc/renormalization.hpp"
#include "cylperc/rng.hpp"

using namespace cylperc;
namespace mp = boost::multiprecision;

namespace {

// Direct double-precision summation of the tail series.
double tail_oracle(double a0_hat, int k0) {
  double s = 0.0;
  for (int k = k0 - 1;; ++k) {
    const double term = std::exp(-std::pow(7.0 / 6.0, k) * std::log(a0_hat) / 4.0);
    if (term < 1e-300) break;
    s += term;
  }
  return 20.0 * s;
}

Cylinder random_cylinder(Rng& rng, double spread) {
  const Vec3 p{rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(0, 1000)};
  return Cylinder(Line3::through(p, rng.unit_vector()));
}

}  // namespace

TEST_CASE("scale sequence") {
  const BigFloat a0 = mp::pow(BigFloat(288), 6);
  const ScaleSequence seq(a0, false);
  const BigFloat expect = mp::pow(BigFloat(288), 7);
  CHECK(mp::abs(seq.scale(1) / expect - 1) < BigFloat("1e-40"));
  for (int n = 1; n <= 5; ++n) {
    const BigFloat ratio = seq.scale(n) / seq.scale(n - 1);
    const BigFloat law = mp::pow(seq.scale(n - 1), BigFloat(1) / 6);
    CHECK(mp::abs(ratio / law - 1) < BigFloat("1e-12"));
    CHECK(seq.ratio_288_holds(n));
  }
  CHECK(ScaleSequence::desk(8000).scale_double(0) == doctest::Approx(8000.0));
  CHECK_THROWS_AS(ScaleSequence(BigFloat(1e10), false), DomainError);
  CHECK_THROWS_AS(ScaleSequence::desk(7999), DomainError);
  CHECK_THROWS_AS(ScaleSequence::desk(1e5).scale_double(30), ResourceLimit);
  CHECK(ScaleSequence::gamma_pow(2) == Rational(49, 36));
}

TEST_CASE("covering soundness and enumeration") {
  const HexTiling tiling;
  for (double a0 : {8000.0, 1e5}) {
    const ScaleSequence seq = ScaleSequence::desk(a0);
    for (int i = 1; i <= 4; ++i) {
      const CoveringSet cov = build_covering(seq, 1, i);
      CHECK(cov.rho == doctest::Approx(a0));
      CHECK(cov.spacing == doctest::Approx(a0 / 10));
      Rng rng(derive_seed(static_cast<std::uint64_t>(a0), static_cast<std::uint64_t>(i)));
      for (int k = 0; k < 1000; ++k) {
        Vec2 x;
        do x = rng.disk(tiling.circumradius());
        while (!tiling.in_central_face(x));
        const double phi = rng.uniform(0, 2 * std::numbers::pi);
        REQUIRE(cov.covers_point(x + cov.radius * Vec2{std::cos(phi), std::sin(phi)}));
      }
      for (std::size_t k = 0; k < cov.points.size(); ++k) {
        CHECK(covering_predicate(cov.points[k], cov.rho, cov.radius, FaceModel::Hexagon));
        CHECK(cov.points[k].x == doctest::Approx(cov.spacing * static_cast<double>(cov.indices[k].first)));
      }
    }
  }
  CHECK_THROWS_AS(build_covering(ScaleSequence::desk(8000), 0, 1), DomainError);
  CHECK_THROWS_AS(build_covering(ScaleSequence::desk(8000), 1, 5), DomainError);
}

TEST_CASE("point-face covering equals annulus scan") {
  const ScaleSequence seq = ScaleSequence::desk(8000);
  for (int i = 1; i <= 4; ++i) {
    const CoveringSet cov = build_covering(seq, 1, i, FaceModel::Point);
    std::set<std::pair<std::int64_t, std::int64_t>> got(cov.indices.begin(), cov.indices.end());
    std::set<std::pair<std::int64_t, std::int64_t>> expect;
    const auto m = static_cast<std::int64_t>((cov.radius + cov.rho) / cov.spacing) + 2;
    for (std::int64_t q = -m; q <= m; ++q)
      for (std::int64_t p = -m; p <= m; ++p) {
        const double r = std::hypot(static_cast<double>(p), static_cast<double>(q)) * cov.spacing;
        if (std::abs(r - cov.radius) <= cov.rho) expect.insert({p, q});
      }
    CHECK(got == expect);
  }
}

TEST_CASE("secant index selection") {
  const ScaleSequence seq = ScaleSequence::desk(8000);
  const double an = seq.scale_double(1);
  const Cylinder v0(Line3::through({0, 0, 0}, {0, 0, 1}));
  CHECK(select_secant_indices(seq, 1, v0, v0) == std::pair{1, 2});
  const Cylinder half(Line3::through({0, an / 2, 500}, {1, 0, 0}));
  CHECK(projected_axis_distance(half.axis) == doctest::Approx(an / 2));
  CHECK(select_secant_indices(seq, 1, half, v0) == std::pair{1, 3});

  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Cylinder c1 = random_cylinder(rng, an), c2 = random_cylinder(rng, an);
    const auto [i1, i2] = select_secant_indices(seq, 1, c1, c2);
    REQUIRE(i1 != i2);
    for (const Cylinder* c : {&c1, &c2}) {
      // Distance from the origin to the projected axis, computed separately.
      const Vec2 p{c->axis.anchor.x, c->axis.anchor.y}, d{c->axis.dir.x, c->axis.dir.y};
      const double dist = norm(d) < 1e-12 ? norm(p) : std::abs(cross(p, d)) / norm(d);
      for (int i : {i1, i2}) REQUIRE(!(dist >= (2 * i + 1) * an / 12 && dist < (2 * i + 3) * an / 12));
    }
  }
}

TEST_CASE("touched covering balls") {
  const ScaleSequence seq = ScaleSequence::desk(8000);
  const CoveringSet cov = build_covering(seq, 1, 2);
  const Cylinder far(Line3::through({1e7, 1e7, 0}, {0, 0, 1}));
  CHECK(count_touched(cov, far, far) == 0);
  const Vec2 p = cov.points.front();
  const Cylinder on(Line3::through({p.x, p.y, 0}, {0, 0, 1}));
  CHECK(count_touched(cov, on, far) >= 1);
}

TEST_CASE("annulus chord length") {
  CHECK(annulus_chord_length(0.0, 100.0, 0.01) == doctest::Approx(2.0));
  Rng rng(6);
  auto root = [](double d, double rad) {
    // Smallest y >= 0 with d^2 + y^2 >= rad^2, by bisection.
    double lo = 0.0, hi = rad;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (d * d + mid * mid >= rad * rad ? hi : lo) = mid;
    }
    return hi;
  };
  for (int k = 0; k < 2000; ++k) {
    const double R = rng.uniform(1.0, 1e4), eps = rng.uniform(1e-4, 1.0 / 24.0);
    const double d = rng.uniform(0.0, 0.999) * R * (1 - eps);
    const double expect = root(d, (1 + eps) * R) - root(d, (1 - eps) * R);
    CHECK(annulus_chord_length(d, R, eps) == doctest::Approx(expect).epsilon(1e-9).scale(R));
  }
  double worst = 0.0;
  for (int a = 0; a < 100; ++a)
    for (int b = 1; b <= 100; ++b) {
      const double x = 11.0 / 12.0 * a / 99.0, eps = b / 2400.0;
      if (x >= 1 - eps) continue;
      worst = std::max(worst, annulus_chord_length(x, 1.0, eps) / eps);
    }
  CHECK(worst <= 10.0);
  CHECK_THROWS_AS(annulus_chord_length(1.0, 1.0, 0.01), DomainError);
  CHECK_THROWS_AS(annulus_chord_length(0.0, 1.0, 0.1), DomainError);
}

TEST_CASE("p_n and q_n estimators") {
  const ScaleSequence seq = ScaleSequence::desk(8000);
  const std::vector<Vec2> xs{{0, 0}, {300, 100}};
  const ScaleEstimate zero = estimate_pn(seq, 0, 0.0, xs, 10, 1);
  CHECK(zero.best.mean == 0.0);
  CHECK(zero.sup_is_proxy);

  double prev = 0.0;
  for (double u : {1e-6, 4e-6, 1.6e-5}) {
    const ScaleEstimate e = estimate_pn(seq, 0, u, xs, 30, 5);
    CHECK(e.best.mean >= prev);
    prev = e.best.mean;
  }

  const double u = 4e-6;
  const ScaleEstimate p = estimate_pn(seq, 0, u, xs, 30, 9);
  for (const auto& fam : pair_family_names()) {
    const ScaleEstimate q = estimate_qn(seq, 0, u, fam, 30, 9, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK(q.per_point[k].mean >= p.per_point[k].mean);
  }
  CHECK(estimate_qn(seq, 0, 0.0, "vertical", 5, 1, xs).best.mean == 0.0);
  CHECK(estimate_qn(ScaleSequence::desk(1e5), 0, 0.0, "edge-hugging", 3, 1, {{0, 0}}).best.mean == 0.0);
  CHECK_THROWS_AS(estimate_qn(seq, 0, u, "no-such-family", 5, 1, xs), DomainError);
  CHECK_THROWS_AS(estimate_pn(seq, 0, u, {{5000, 0}}, 5, 1), DomainError);
}

TEST_CASE("recursion right-hand side") {
  const ScaleSequence seq = ScaleSequence::desk(8000);
  const double a = 8000.0;
  const BigFloat cp(2), cq(3);
  auto oracle = [&](double p, double q) {
    const double base = std::cbrt(a) * p * p + std::pow(a, -2.0 / 3) + q * q;
    const double pb = 2 * base;
    const double qb = 3 * base + 3 * (std::pow(a, 1.0 / 6) * p * q + std::pow(a, -1.0 / 6) * q + std::pow(a, -5.0 / 6)) +
                      3 * (q * q + std::pow(a, -1.0 / 3));
    return std::pair{pb, qb};
  };
  for (double p : {0.0, 1e-3, 0.01, 0.1})
    for (double q : {0.0, 1e-3, 0.01, 0.1}) {
      const auto [pb, qb] = recursion_rhs(BigFloat(p), BigFloat(q), seq, 1, cp, cq);
      const auto [po, qo] = oracle(p, q);
      CHECK(pb.convert_to<double>() == doctest::Approx(po).epsilon(1e-12));
      CHECK(qb.convert_to<double>() == doctest::Approx(qo).epsilon(1e-12));
    }
  const auto [p0, q0] = recursion_rhs(0, 0, seq, 1, 1, 1);
  CHECK(p0.convert_to<double>() == doctest::Approx(std::pow(a, -4.0 / 6)).epsilon(1e-12));

  // Threshold inputs give p_bound <= 8 c_p a^(3(1 - gamma)).
  const BigFloat big_a = mp::pow(BigFloat(288), 6);
  const ScaleSequence full(big_a, false);
  const BigFloat pt = mp::pow(big_a, BigFloat(-5) / 12), qt = mp::pow(big_a, BigFloat(-1) / 4);
  for (double c : {1.0, 10.0}) {
    const auto [pb, qb] = recursion_rhs(pt, qt, full, 1, c, c);
    CHECK(pb <= 8 * BigFloat(c) * mp::pow(big_a, BigFloat(-1) / 2));
  }

  // Monotone in both inputs.
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const BigFloat p(i / 100.0), q(j / 100.0), dp(0.001);
      const auto base = recursion_rhs(p, q, seq, 1, 1, 1);
      const auto up_p = recursion_rhs(p + dp, q, seq, 1, 1, 1);
      const auto up_q = recursion_rhs(p, q + dp, seq, 1, 1, 1);
      CHECK(up_p.first >= base.first);
      CHECK(up_p.second >= base.second);
      CHECK(up_q.first >= base.first);
      CHECK(up_q.second >= base.second);
    }
  CHECK_THROWS_AS(recursion_rhs(2, 0, seq, 1, 1, 1), DomainError);
}

TEST_CASE("induction step arithmetic") {
  const InductionCheck d = induction_step_details(induction_scale(1, 1));
  CHECK(d.p_exponent == Rational(-71, 168));
  CHECK(d.p_target == Rational(-70, 168));
  CHECK(d.q_exponent == Rational(-47, 168));
  CHECK(d.q_target == Rational(-42, 168));
  CHECK(d.ok());
  for (double c : {1.0, 10.0}) CHECK(check_induction_step(induction_scale(c, c), c, c));
  // 288^6 is far below 800^168: absorption fails for c = 100.
  CHECK_FALSE(check_induction_step(mp::pow(BigFloat(288), 6), 100, 100));
  CHECK_FALSE(check_induction_step(BigFloat(1e10)));

  const RecursionTrace t = iterate_recursion(induction_scale(1, 1), 20);
  CHECK(t.below_thresholds);
  CHECK(t.p.size() == 21);
}

TEST_CASE("tail bound") {
  const BigFloat v = tail_bound(BigFloat("1e16"), 1);
  CHECK(v.convert_to<double>() == doctest::Approx(tail_oracle(1e16, 1)).epsilon(1e-12));
  // Frozen value: the first term alone is 2e-3, the second adds ~4.3e-4.
  CHECK(v.convert_to<double>() == doctest::Approx(2.512482982842e-3).epsilon(1e-10));
  for (int k0 = 1; k0 < 8; ++k0) CHECK(tail_bound(BigFloat("1e16"), k0 + 1) < tail_bound(BigFloat("1e16"), k0));
  const BigFloat a = mp::pow(BigFloat(288), 6);
  CHECK(tail_k0(a, BigFloat(1) / 3) == 1);
  CHECK(tail_bound(a, 1).convert_to<double>() == doctest::Approx(tail_oracle(std::pow(288.0, 6), 1)).epsilon(1e-10));
  CHECK_THROWS_AS(tail_bound(BigFloat(1), 1), DomainError);
}
