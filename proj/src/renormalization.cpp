#include "cylperc/renormalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "cylperc/errors.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/parallel.hpp"
#include "cylperc/rng.hpp"
#include "cylperc/surface.hpp"

namespace cylperc {

namespace mp = boost::multiprecision;

BigFloat to_big(const Rational& q) {
  return static_cast<BigFloat>(mp::numerator(q)) / static_cast<BigFloat>(mp::denominator(q));
}

namespace {

BigFloat pow288_6() { return mp::pow(BigFloat(288), 6); }

// Largest decimal exponent we let a_n reach.
constexpr double kMaxLog10 = 1e7;

}  // namespace

ScaleSequence::ScaleSequence(const BigFloat& a0, bool desk_mode) : a0_(a0), desk_(desk_mode) {
  if (desk_mode) {
    if (a0 < 8000) throw DomainError("ScaleSequence: desk mode needs a0 >= 8000");
  } else if (a0 < pow288_6()) {
    throw DomainError("ScaleSequence: a0 must be >= 288^6 outside desk mode");
  }
}

Rational ScaleSequence::gamma_pow(int n) {
  if (n < 0) throw DomainError("ScaleSequence: level must be >= 0");
  return Rational(mp::pow(mp::cpp_int(7), static_cast<unsigned>(n)), mp::pow(mp::cpp_int(6), static_cast<unsigned>(n)));
}

BigFloat ScaleSequence::scale(int n) const {
  const Rational e = gamma_pow(n);
  const BigFloat ln_a = to_big(e) * mp::log(a0_);
  if (ln_a / mp::log(BigFloat(10)) > kMaxLog10) {
    std::ostringstream msg;
    msg << "scale: a_" << n << " = a0^(" << e << ") exceeds the extended range";
    throw ResourceLimit(msg.str());
  }
  return mp::exp(ln_a);
}

double ScaleSequence::scale_double(int n) const {
  const BigFloat a = scale(n);
  if (a > BigFloat(std::numeric_limits<double>::max())) {
    std::ostringstream msg;
    msg << "scale: a_" << n << " = a0^(" << gamma_pow(n) << ") exceeds double range";
    throw ResourceLimit(msg.str());
  }
  return a.convert_to<double>();
}

bool ScaleSequence::ratio_288_holds(int n) const { return scale(n + 1) >= 288 * scale(n); }

bool covering_predicate(Vec2 x, double rho, double R, FaceModel face, const HexTiling& tiling) {
  double mind, maxd;
  if (face == FaceModel::Point) {
    mind = maxd = norm(x);
  } else {
    mind = tiling.dist_to_central_face(x);
    maxd = tiling.maxdist_to_central_face(x);
  }
  return mind - rho <= R && R <= maxd + rho;
}

bool CoveringSet::covers_point(Vec2 y) const {
  for (const Vec2& p : points)
    if (norm(p - y) <= spacing) return true;
  return false;
}

CoveringSet build_covering(const ScaleSequence& seq, int n, int i, FaceModel face, const HexTiling& tiling) {
  if (n < 1) throw DomainError("build_covering: level must be >= 1");
  if (i < 1 || i > 4) throw DomainError("build_covering: index must be in 1..4");
  CoveringSet cov;
  cov.n = n;
  cov.i = i;
  cov.face = face;
  cov.rho = seq.scale_double(n - 1);
  cov.spacing = cov.rho / 10.0;
  cov.radius = (i + 1) * seq.scale_double(n) / 6.0;
  const double slack = face == FaceModel::Point ? 0.0 : tiling.circumradius();
  const double ro = cov.radius + cov.rho + slack;
  const double ri = cov.radius - cov.rho - slack;
  const double sp = cov.spacing;
  if (std::pow(ro / sp, 2) > 1e9) throw ResourceLimit("build_covering: too many lattice candidates");
  const auto qmax = static_cast<std::int64_t>(std::ceil(ro / sp));
  for (std::int64_t q = -qmax; q <= qmax; ++q) {
    const double y = static_cast<double>(q) * sp;
    if (std::abs(y) > ro) continue;
    const auto pout = static_cast<std::int64_t>(std::floor(std::sqrt(ro * ro - y * y) / sp));
    std::int64_t pin = -1;
    if (ri > std::abs(y)) pin = static_cast<std::int64_t>(std::ceil(std::sqrt(ri * ri - y * y) / sp)) - 1;
    auto visit = [&](std::int64_t p) {
      const Vec2 x{static_cast<double>(p) * sp, y};
      if (covering_predicate(x, cov.rho, cov.radius, face, tiling)) {
        cov.points.push_back(x);
        cov.indices.emplace_back(p, q);
      }
    };
    if (pin < 0) {
      for (std::int64_t p = -pout; p <= pout; ++p) visit(p);
    } else {
      for (std::int64_t p = -pout; p <= -pin; ++p) visit(p);
      for (std::int64_t p = pin; p <= pout; ++p) visit(p);
    }
  }
  return cov;
}

double projected_axis_distance(const Line3& axis) {
  const double dh = std::hypot(axis.dir.x, axis.dir.y);
  if (dh < 1e-12) return 0.0;
  const Vec2 e{axis.dir.x / dh, axis.dir.y / dh};
  return std::abs(cross(Vec2{axis.anchor.x, axis.anchor.y}, e));
}

bool secant_allowed(double d, int i, double an) {
  return !(d >= (2 * i + 1) * an / 12.0 && d < (2 * i + 3) * an / 12.0);
}

std::pair<int, int> select_secant_indices(const ScaleSequence& seq, int n, const Cylinder& c1, const Cylinder& c2) {
  if (n < 1) throw DomainError("select_secant_indices: level must be >= 1");
  const double an = seq.scale_double(n);
  const double d1 = projected_axis_distance(c1.axis);
  const double d2 = projected_axis_distance(c2.axis);
  auto ok = [&](int i) { return secant_allowed(d1, i, an) && secant_allowed(d2, i, an); };
  for (int i1 = 1; i1 <= 4; ++i1)
    for (int i2 = i1 + 1; i2 <= 4; ++i2)
      if (ok(i1) && ok(i2)) return {i1, i2};
  throw std::logic_error("select_secant_indices: no admissible pair");
}

std::size_t count_touched(const CoveringSet& cov, const Cylinder& c1, const Cylinder& c2) {
  std::size_t k = 0;
  for (const Vec2& x : cov.points) {
    const Window w = Window::disk_slab(x, cov.spacing, 0.0, kSlabHeight);
    if (hits_region(c1.axis, w, c1.radius) || hits_region(c2.axis, w, c2.radius)) ++k;
  }
  return k;
}

double annulus_chord_length(double d, double R, double eps) {
  if (!(R > 0.0)) throw DomainError("annulus_chord_length: R must be positive");
  if (!(eps > 0.0 && eps <= 1.0 / 24.0)) throw DomainError("annulus_chord_length: need 0 < eps <= 1/24");
  if (!(d >= 0.0 && d < R * (1.0 - eps))) throw DomainError("annulus_chord_length: need 0 <= d < R(1 - eps)");
  const double x = d / R;
  return R * (std::sqrt((1.0 + eps) * (1.0 + eps) - x * x) - std::sqrt((1.0 - eps) * (1.0 - eps) - x * x));
}

std::vector<Vec2> default_x_points(const HexTiling& tiling) {
  std::vector<Vec2> pts{{0.0, 0.0}};
  const double r = 0.25 * tiling.period();
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return pts;
}

namespace {

std::uint64_t point_seed(std::uint64_t seed, std::size_t k, std::size_t r) {
  return derive_seed(derive_seed(seed, k), r);
}

void check_x_points(const std::vector<Vec2>& xs, const HexTiling& tiling) {
  if (xs.empty()) throw DomainError("x_points must be nonempty");
  for (const Vec2& x : xs)
    if (!tiling.in_central_face(x)) throw DomainError("x_points must lie in the central hexagon");
}

ScaleEstimate summarize(const std::vector<std::vector<std::size_t>>& hits, std::size_t reps, std::uint64_t seed) {
  ScaleEstimate est;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    std::size_t best = 0, best_pair = 0;
    for (std::size_t p = 0; p < hits[k].size(); ++p)
      if (hits[k][p] > best) {
        best = hits[k][p];
        best_pair = p;
      }
    est.per_point.push_back(binomial_estimate(best, reps, seed));
    if (k == 0 || est.per_point.back().mean > est.best.mean) {
      est.best = est.per_point.back();
      est.best_point = k;
      est.best_pair = best_pair;
    }
  }
  return est;
}

}  // namespace

ScaleEstimate estimate_pn(const ScaleSequence& seq, int n, double u, const std::vector<Vec2>& x_points,
                          std::size_t reps, std::uint64_t seed, double h, unsigned threads) {
  if (!(u >= 0.0)) throw DomainError("estimate_pn: intensity must be >= 0");
  if (reps == 0) throw DomainError("estimate_pn: reps must be positive");
  check_x_points(x_points, HexTiling());
  const double a = seq.scale_double(n);
  std::vector<std::vector<std::size_t>> hits(x_points.size(), std::vector<std::size_t>(1, 0));
  for (std::size_t k = 0; k < x_points.size(); ++k) {
    const Vec2 x = x_points[k];
    const Window w = Window::disk_slab(x, a, 0.0, kSlabHeight);
    std::vector<std::uint8_t> out(reps, 0);
    parallel_for(reps, threads, [&](std::size_t r) {
      out[r] = obstacle_crossing(sample_poisson(u, w, point_seed(seed, k, r)), x, a, h);
    });
    for (auto v : out) hits[k][0] += v;
  }
  return summarize(hits, reps, seed);
}

const std::vector<std::string>& pair_family_names() {
  static const std::vector<std::string> names{"edge-hugging", "radial", "tangent", "vertical"};
  return names;
}

std::vector<std::pair<Line3, Line3>> line_pair_family(const std::string& name, Vec2 x0, double a,
                                                      const HexTiling& tiling) {
  std::vector<std::pair<Line3, Line3>> out;
  auto horizontal = [](Vec2 p, double z, Vec2 dir) { return Line3::through({p.x, p.y, z}, {dir.x, dir.y, 0.0}); };
  if (name == "edge-hugging") {
    const Vec2 c = tiling.nearest_center(x0);
    const auto nb = tiling.neighbor_vectors();
    for (double off : {0.0, 0.5, 1.0})
      for (int k = 0; k < 6; ++k) {
        auto edge_line = [&](int m) {
          const Vec2 v = nb[static_cast<std::size_t>(m % 6)] / tiling.period();
          return horizontal(c + (tiling.apothem() + off) * v, 0.5, perp(v));
        };
        out.emplace_back(edge_line(k), edge_line(k + 1));
      }
  } else if (name == "radial") {
    for (double rot : {0.0, std::numbers::pi / 6.0})
      for (auto [z1, z2] : {std::pair{0.5, 0.5}, std::pair{0.5, 500.0}, std::pair{500.0, 500.0}}) {
        const Vec2 e1{std::cos(rot), std::sin(rot)};
        out.emplace_back(horizontal(x0, z1, e1), horizontal(x0, z2, perp(e1)));
      }
  } else if (name == "tangent") {
    for (int i = 1; i <= 4; ++i) {
      const double R = (i + 1) * a / 6.0;
      out.emplace_back(horizontal(x0 + Vec2{R, 0.0}, 0.5, {0.0, 1.0}), horizontal(x0 + Vec2{0.0, R}, 0.5, {1.0, 0.0}));
    }
  } else if (name == "vertical") {
    out.emplace_back(Line3::through({x0.x, x0.y, 0.0}, {0, 0, 1}), Line3::through({x0.x + 1.5, x0.y, 0.0}, {0, 0, 1}));
  } else {
    throw DomainError("unknown pair family: " + name);
  }
  return out;
}

namespace {

// Trace components with terminal flags and a cell index.
struct IndexedTrace {
  std::vector<TraceComponent> comps;
  std::vector<int> flags;
  CellMap owner;
  IndexedTrace() : owner(16) {}
};

IndexedTrace index_components(std::vector<TraceComponent> comps, const GridSpec& grid, Vec2 x0, double a) {
  IndexedTrace t;
  std::size_t total = 0;
  for (const auto& c : comps) total += c.cells.size();
  t.owner = CellMap(total);
  t.comps = std::move(comps);
  for (std::size_t id = 0; id < t.comps.size(); ++id) {
    t.flags.push_back(terminal_flags(t.comps[id], grid, x0, a / 10.0, a));
    for (const Cell& c : t.comps[id].cells) t.owner.insert(cell_key(c.i, c.j), static_cast<std::int32_t>(id));
  }
  return t;
}

// Pairs (a, b) of components of `from` and `to` that touch.
std::vector<std::pair<std::int32_t, std::int32_t>> touching(const IndexedTrace& from, const IndexedTrace& to) {
  std::vector<std::pair<std::int32_t, std::int32_t>> links;
  for (std::size_t id = 0; id < from.comps.size(); ++id)
    for (const Cell& c : from.comps[id].cells)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const std::int32_t v = to.owner.find(cell_key(c.i + di, c.j + dj));
          if (v >= 0) links.emplace_back(static_cast<std::int32_t>(id), v);
        }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  return links;
}

}  // namespace

ScaleEstimate estimate_qn(const ScaleSequence& seq, int n, double u, const std::string& family, std::size_t reps,
                          std::uint64_t seed, const std::vector<Vec2>& x_points, double h, unsigned threads) {
  if (!(u >= 0.0)) throw DomainError("estimate_qn: intensity must be >= 0");
  if (reps == 0) throw DomainError("estimate_qn: reps must be positive");
  check_x_points(x_points, HexTiling());
  const double a = seq.scale_double(n);
  std::vector<std::vector<std::size_t>> hits(x_points.size());
  for (std::size_t k = 0; k < x_points.size(); ++k) {
    const Vec2 x = x_points[k];
    const GridSpec grid = trace_grid(x, a, h);
    const DiskClip clip{true, x, a};
    const auto pairs = line_pair_family(family, x, a);

    // Index each distinct deterministic line once.
    std::vector<Line3> lines;
    std::vector<std::pair<std::size_t, std::size_t>> pair_ids;
    auto line_id = [&](const Line3& l) {
      for (std::size_t m = 0; m < lines.size(); ++m)
        if (lines[m].anchor == l.anchor && lines[m].dir == l.dir) return m;
      lines.push_back(l);
      return lines.size() - 1;
    };
    for (const auto& [l1, l2] : pairs) {
      const std::size_t a1 = line_id(l1);
      const std::size_t a2 = line_id(l2);
      pair_ids.emplace_back(a1, a2);
    }
    std::vector<IndexedTrace> fixed(lines.size());
    for (std::size_t m = 0; m < lines.size(); ++m)
      fixed[m] = index_components(trace_cylinder(lines[m], SurfaceModel::H(), grid, clip, m), grid, x, a);
    std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> pair_links;
    for (const auto& [a1, a2] : pair_ids) pair_links.push_back(touching(fixed[a2], fixed[a1]));

    const Window w = Window::disk_slab(x, a, 0.0, kSlabHeight);
    std::vector<std::vector<std::uint8_t>> out(reps, std::vector<std::uint8_t>(pairs.size(), 0));
    parallel_for(reps, threads, [&](std::size_t r) {
      const LineSample s = sample_poisson(u, w, point_seed(seed, k, r));
      const IndexedTrace rnd = index_components(sample_traces(s, x, a, h), grid, x, a);
      const auto rr_links = touching(rnd, rnd);
      std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> to_fixed(fixed.size());
      std::vector<std::uint8_t> needed(fixed.size(), 0);
      for (const auto& [a1, a2] : pair_ids) needed[a1] = needed[a2] = 1;
      for (std::size_t m = 0; m < fixed.size(); ++m)
        if (needed[m]) to_fixed[m] = touching(rnd, fixed[m]);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a1, a2] = pair_ids[p];
        const IndexedTrace& A = fixed[a1];
        const IndexedTrace& B = fixed[a2];
        // Nodes: 0 inner, 1 outer, then A, B, random components.
        const std::size_t baseA = 2, baseB = baseA + A.comps.size(), baseR = baseB + B.comps.size();
        DisjointSets dsu(baseR + rnd.comps.size());
        auto attach = [&](const IndexedTrace& t, std::size_t base) {
          for (std::size_t c = 0; c < t.comps.size(); ++c) {
            if (t.flags[c] & 1) dsu.unite(base + c, 0);
            if (t.flags[c] & 2) dsu.unite(base + c, 1);
          }
        };
        attach(A, baseA);
        attach(B, baseB);
        attach(rnd, baseR);
        for (const auto& [b, aa] : pair_links[p]) dsu.unite(baseB + static_cast<std::size_t>(b), baseA + static_cast<std::size_t>(aa));
        for (const auto& [r1, r2] : rr_links) dsu.unite(baseR + static_cast<std::size_t>(r1), baseR + static_cast<std::size_t>(r2));
        for (const auto& [rc, fc] : to_fixed[a1]) dsu.unite(baseR + static_cast<std::size_t>(rc), baseA + static_cast<std::size_t>(fc));
        for (const auto& [rc, fc] : to_fixed[a2]) dsu.unite(baseR + static_cast<std::size_t>(rc), baseB + static_cast<std::size_t>(fc));
        out[r][p] = dsu.find(0) == dsu.find(1);
      }
    });
    hits[k].assign(pairs.size(), 0);
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t p = 0; p < pairs.size(); ++p) hits[k][p] += out[r][p];
  }
  return summarize(hits, reps, seed);
}

std::pair<BigFloat, BigFloat> recursion_rhs(const BigFloat& p, const BigFloat& q, const ScaleSequence& seq, int n,
                                            const BigFloat& c_p, const BigFloat& c_q) {
  if (n < 1) throw DomainError("recursion_rhs: level must be >= 1");
  if (p < 0 || p > 1 || q < 0 || q > 1) throw DomainError("recursion_rhs: probabilities must be in [0, 1]");
  if (c_p <= 0 || c_q <= 0) throw DomainError("recursion_rhs: constants must be positive");
  const BigFloat a = seq.scale(n - 1);
  const BigFloat g = mp::pow(a, to_big(ScaleSequence::gamma() - 1));  // a^(gamma - 1)
  const BigFloat r = 1 / g;                                          // a^(1 - gamma)
  const BigFloat r2 = r * r;
  const BigFloat r6 = r2 * r2 * r2;
  const BigFloat first = g * g * (p * p + r6 + r2 * q * q);
  const BigFloat p_bound = c_p * first;
  const BigFloat q_bound = c_q * first + c_q * g * (p * q + r2 * q + r6) + c_q * (q * q + r2);
  return {p_bound, q_bound};
}

BigFloat induction_scale(double c_p, double c_q) {
  const BigFloat c = 8 * BigFloat(std::max(c_p, c_q));
  const BigFloat absorb = mp::pow(c, 168);
  const BigFloat base = pow288_6();
  return absorb > base ? absorb : base;
}

InductionCheck induction_step_details(const BigFloat& a0_hat, double c_p, double c_q) {
  InductionCheck r;
  const Rational g = ScaleSequence::gamma();
  const Rational one(1);
  r.p_exponent = 3 * (one / g - 1) + Rational(1, 168);
  r.p_target = Rational(5, 2) * (1 - g);
  r.q_exponent = 2 * (one / g - 1) + Rational(1, 168);
  r.q_target = Rational(3, 2) * (1 - g);
  r.exponents_ok = r.p_exponent < r.p_target && r.q_exponent < r.q_target;
  r.scale_ok = a0_hat >= pow288_6();
  if (a0_hat > 1 && c_p > 0 && c_q > 0) {
    // ln(a0_hat)/168 >= ln(8c), with a relative slack for the boundary case.
    const BigFloat lhs = mp::log(a0_hat) / 168;
    const BigFloat rhs = mp::log(8 * BigFloat(std::max(c_p, c_q)));
    r.absorption_ok = lhs >= rhs - BigFloat("1e-40") * mp::abs(rhs);
  }
  return r;
}

bool check_induction_step(const BigFloat& a0_hat, double c_p, double c_q) {
  return induction_step_details(a0_hat, c_p, c_q).ok();
}

RecursionTrace iterate_recursion(const BigFloat& a0_hat, int levels, double c_p, double c_q) {
  const ScaleSequence seq(a0_hat, false);
  const Rational g = ScaleSequence::gamma();
  const BigFloat ep = to_big(Rational(5, 2) * (1 - g));
  const BigFloat eq = to_big(Rational(3, 2) * (1 - g));
  RecursionTrace t;
  auto thresholds = [&](int n) {
    const BigFloat a = seq.scale(n);
    t.p_threshold.push_back(mp::pow(a, ep));
    t.q_threshold.push_back(mp::pow(a, eq));
  };
  thresholds(0);
  t.p.push_back(t.p_threshold[0]);
  t.q.push_back(t.q_threshold[0]);
  for (int n = 1; n <= levels; ++n) {
    auto [p, q] = recursion_rhs(t.p.back(), t.q.back(), seq, n, BigFloat(c_p), BigFloat(c_q));
    thresholds(n);
    t.p.push_back(p);
    t.q.push_back(q);
    if (p > t.p_threshold.back() || q > t.q_threshold.back()) t.below_thresholds = false;
  }
  return t;
}

BigFloat tail_bound(const BigFloat& a0_hat, int k0) {
  if (!(a0_hat > 1)) throw DomainError("tail_bound: a0_hat must exceed 1");
  if (k0 < 1) throw DomainError("tail_bound: k0 must be >= 1");
  const BigFloat ln_base = -mp::log(a0_hat) / 4;
  const BigFloat floor_term("1e-300");
  BigFloat sum = 0;
  BigFloat gk = to_big(ScaleSequence::gamma_pow(k0 - 1));
  const BigFloat gamma = to_big(ScaleSequence::gamma());
  for (;;) {
    const BigFloat term = mp::exp(gk * ln_base);
    if (term < floor_term) break;
    sum += term;
    gk *= gamma;
  }
  return 20 * sum;
}

int tail_k0(const BigFloat& a0_hat, const BigFloat& target, int max_k0) {
  for (int k0 = 1; k0 <= max_k0; ++k0)
    if (tail_bound(a0_hat, k0) < target) return k0;
  return -1;
}

}  // namespace cylperc
