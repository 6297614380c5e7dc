#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cylperc/errors.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/rng.hpp"
#include "cylperc/surface.hpp"
#include "cylperc/trace.hpp"

using namespace cylperc;

namespace {

bool brute_occupied(const std::vector<Line3>& lines, const SurfaceModel& surf, Vec2 x) {
  const Vec3 p = surf.lift(x);
  for (const Line3& l : lines)
    if (dist_point_line(p, l) <= 1.0) return true;
  return false;
}

// Full-grid obstacle crossing: 8-paths of occupied cells meeting the
// disk of radius a, from cells meeting S(x0, a/10) to cells straddling
// the circle of radius a.
bool brute_crossing(const std::vector<Line3>& lines, Vec2 x0, double a, double h) {
  const GridSpec g = trace_grid(x0, a, h);
  const SurfaceModel surf = SurfaceModel::H();
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(g.cells()), 0), seen(occ.size(), 0);
  std::deque<std::pair<std::int64_t, std::int64_t>> q;
  for (std::int64_t j = 0; j < g.ny; ++j)
    for (std::int64_t i = 0; i < g.nx; ++i) {
      const auto k = static_cast<std::size_t>(j * g.nx + i);
      occ[k] = g.min_dist(i, j, x0) <= a && brute_occupied(lines, surf, g.center(i, j));
      if (occ[k] && g.min_dist(i, j, x0) <= a / 10) {
        seen[k] = 1;
        q.emplace_back(i, j);
      }
    }
  while (!q.empty()) {
    const auto [i, j] = q.front();
    q.pop_front();
    if (g.min_dist(i, j, x0) <= a && g.max_dist(i, j, x0) >= a) return true;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const std::int64_t ni = i + di, nj = j + dj;
        if (!g.contains(ni, nj)) continue;
        const auto k = static_cast<std::size_t>(nj * g.nx + ni);
        if (occ[k] && !seen[k]) {
          seen[k] = 1;
          q.emplace_back(ni, nj);
        }
      }
  }
  return false;
}

// Independent vacant 4-crossing search on a mask.
bool brute_vacant_crossing(const GridMask& m, Vec2 x0, double r_in, double r_out) {
  const GridSpec& g = m.spec;
  auto cls = [&](std::int64_t i, std::int64_t j) {
    if (!g.contains(i, j)) return 2;
    const double d = norm(g.center(i, j) - x0);
    return d < r_in ? 0 : (d > r_out ? 2 : 1);
  };
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.cells()), 0);
  std::deque<std::pair<std::int64_t, std::int64_t>> q;
  for (std::int64_t j = 0; j < g.ny; ++j)
    for (std::int64_t i = 0; i < g.nx; ++i) {
      if (cls(i, j) != 1 || m.at(i, j)) continue;
      bool start = false;
      for (int k = 0; k < 4; ++k) start |= cls(i + di[k], j + dj[k]) == 0;
      if (start) {
        seen[static_cast<std::size_t>(j * g.nx + i)] = 1;
        q.emplace_back(i, j);
      }
    }
  while (!q.empty()) {
    const auto [i, j] = q.front();
    q.pop_front();
    for (int k = 0; k < 4; ++k) {
      const std::int64_t ni = i + di[k], nj = j + dj[k];
      const int c = cls(ni, nj);
      if (c == 2) return true;
      if (c != 1 || m.at(ni, nj)) continue;
      auto& s = seen[static_cast<std::size_t>(nj * g.nx + ni)];
      if (!s) {
        s = 1;
        q.emplace_back(ni, nj);
      }
    }
  }
  return false;
}

std::vector<Line3> near_surface_lines(Rng& rng, Vec2 x0, double a, int n) {
  std::vector<Line3> out;
  for (int k = 0; k < n; ++k) {
    const Vec2 p = x0 + rng.disk(a);
    const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
    const Vec3 d{std::cos(phi), std::sin(phi), rng.uniform(-0.3, 0.3)};
    out.push_back(Line3::through(lift_to_H(p) + Vec3{0, 0, rng.uniform(-0.9, 0.9)}, d));
  }
  return out;
}

}  // namespace

TEST_CASE("vertical and high traces") {
  const double h = 0.25;
  const auto comps = trace_cylinder_on_H(Line3::through({123.4, -56.7, 0}, {0, 0, 1}), {100, -50}, 60.0, h);
  REQUIRE(comps.size() == 1);
  CHECK(component_diameter(comps[0], comps[0].grid) <= 2 + 2 * h);
  for (const Cell& c : comps[0].cells) CHECK(norm(comps[0].grid.center(c.i, c.j) - Vec2{123.4, -56.7}) <= 1.0);

  CHECK(trace_cylinder_on_H(Line3::through({0, 0, 2000}, {1, 0.3, 0}), {0, 0}, 1500.0, 0.5).empty());
}

TEST_CASE("edge-parallel trace length") {
  // The vertical edge x = 1000 has length 2000 / sqrt(3).
  const auto comps = trace_cylinder_on_H(Line3::through({1000.5, 0, 0.5}, {0, 1, 0}), {1000, 0}, 2000.0, 0.5);
  double longest = 0.0;
  for (const auto& c : comps) longest = std::max(longest, component_diameter(c, c.grid));
  CHECK(longest <= 2000.0 / std::sqrt(3.0) + 4.0);
  CHECK(longest >= 1100.0);
}

TEST_CASE("rasterization is exact at cell centers") {
  Rng rng(4);
  const Vec2 x0{980, 30};
  for (int rep = 0; rep < 5; ++rep) {
    const auto lines = near_surface_lines(rng, x0, 30.0, 25);
    for (const SurfaceModel& surf : {SurfaceModel::H(), SurfaceModel::plane()}) {
      const LineSample s = fixed_sample(Window::disk_slab(x0, 30.0, -5.0, kSlabHeight), lines);
      const GridMask m = rasterize_surface(s, surf, x0, 30.0, 0.25);
      const GridSpec& g = m.spec;
      for (std::int64_t j = 0; j < g.ny; ++j)
        for (std::int64_t i = 0; i < g.nx; ++i) {
          if (g.min_dist(i, j, x0) > 30.0 + 0.25) continue;
          REQUIRE(m.at(i, j) == brute_occupied(lines, surf, g.center(i, j)));
        }
    }
  }
}

TEST_CASE("component graph matches full-grid search") {
  Rng rng(10);
  const Vec2 x0{1000, 0};
  const double a = 40.0, h = 0.5;
  int positives = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto lines = near_surface_lines(rng, x0, a, 10 + rep % 60);
    const LineSample s = fixed_sample(Window::disk_slab(x0, a), lines);
    const bool expect = brute_crossing(lines, x0, a, h);
    positives += expect;
    REQUIRE(obstacle_crossing(s, x0, a, h) == expect);
    const ComponentGraph cg = build_component_graph(sample_traces(s, x0, a, h), trace_grid(x0, a, h), x0, a / 10, a);
    REQUIRE(cg.terminals_connected() == expect);
  }
  CHECK(positives > 5);
  CHECK(positives < 95);

  const ComponentGraph empty = build_component_graph({}, trace_grid(x0, a, h), x0, a / 10, a);
  CHECK_FALSE(empty.terminals_connected());
}

TEST_CASE("obstacle crossing basics") {
  const Vec2 x0{0, 0};
  CHECK_FALSE(obstacle_crossing(fixed_sample(Window::disk_slab(x0, 8000), {}), x0, 8000));
  CHECK_FALSE(obstacle_crossing(fixed_sample(Window::disk_slab(x0, 8000), {Line3::through({3, 4, 0}, {0, 0, 1})}), x0, 8000));
  // One radial line on the plateau-free tent crosses a short annulus.
  const Vec2 e{1000, 0};
  const Line3 ridge = Line3::through({1000, 0, 0}, {0, 1, 0});
  CHECK(obstacle_crossing(fixed_sample(Window::disk_slab(e, 100), {ridge}), e, 100));
  CHECK_THROWS_AS(obstacle_crossing(fixed_sample(Window::disk_slab(x0, 10), {}), x0, 100), CoverageError);
}

TEST_CASE("adding a cylinder never breaks a crossing") {
  Rng rng(12);
  const Vec2 x0{1000, 0};
  const double a = 40.0;
  for (int rep = 0; rep < 40; ++rep) {
    auto lines = near_surface_lines(rng, x0, a, 10);
    const bool before = obstacle_crossing(fixed_sample(Window::disk_slab(x0, a), lines), x0, a);
    lines.push_back(near_surface_lines(rng, x0, a, 1).front());
    const bool after = obstacle_crossing(fixed_sample(Window::disk_slab(x0, a), lines), x0, a);
    CHECK((!before || after));
  }
}

TEST_CASE("vacant crossings, circuits and duality") {
  const Vec2 x0{0, 0};
  const Window w = Window::disk_slab(x0, 40.0);
  CHECK(vacant_crossing(sample_poisson(0.0, w, 1), x0, 5.0, 40.0));
  CHECK_FALSE(obstacle_circuit(sample_poisson(0.0, w, 1), x0, 5.0, 40.0));
  CHECK(plane_vacant_crossing(sample_poisson(0.0, w, 1), x0, 5.0, 40.0));

  // Ring of overlapping vertical cylinders at radius 20.
  std::vector<Line3> ring;
  for (int k = 0; k < 160; ++k) {
    const double t = 2 * std::numbers::pi * k / 160;
    ring.push_back(Line3::through({20 * std::cos(t), 20 * std::sin(t), 0}, {0, 0, 1}));
  }
  const LineSample rs = fixed_sample(w, ring);
  CHECK(obstacle_circuit(rs, x0, 5.0, 40.0));
  CHECK_FALSE(vacant_crossing(rs, x0, 5.0, 40.0));

  // One strip through the annulus leaves the far side open.
  const LineSample strip = fixed_sample(w, {Line3::through({0, 10, 0}, {1, 0, 0})});
  CHECK(plane_vacant_crossing(strip, x0, 5.0, 40.0));
  // Four strips boxing in the inner disk block it.
  const LineSample box = fixed_sample(w, {Line3::through({0, 10, 0}, {1, 0, 0}), Line3::through({0, -10, 0}, {1, 0, 0}),
                                          Line3::through({10, 0, 0}, {0, 1, 0}), Line3::through({-10, 0, 0}, {0, 1, 0})});
  CHECK_FALSE(plane_vacant_crossing(box, x0, 5.0, 40.0));

  CHECK_THROWS_AS(vacant_crossing(sample_poisson(0.0, w, 1), x0, 0.1, 40.0), DomainError);
  CHECK_THROWS_AS(vacant_crossing(sample_poisson(0.0, Window::disk_slab(x0, 600), 1), x0, 5.0, 600.0), DomainError);

  int checks = 0;
  for (double u : {0.01, 0.03, 0.06, 0.1}) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const LineSample s = sample_poisson(u, Window::disk_slab({500, 300}, 40.0), derive_seed(seed, 77));
      for (bool plane : {false, true}) {
        const GridMask m = plane ? rasterize_plane_regions(s, {500, 300}, 40.0, 0.25)
                                 : rasterize_surface(s, SurfaceModel::H(), {500, 300}, 40.0, 0.25);
        for (double r_out : {20.0, 40.0}) {
          const AnnulusResult a = analyze_annulus(m, {500, 300}, 5.0, r_out);
          REQUIRE(a.vacant_crossing != a.obstacle_circuit);
          REQUIRE(a.vacant_crossing == brute_vacant_crossing(m, {500, 300}, 5.0, r_out));
          ++checks;
        }
      }
    }
  }
  CHECK(checks == 240);
}

TEST_CASE("plane obstacle regions") {
  const PlaneRegion v = plane_obstacle_region(Line3::through({0, 0, 5}, {0, 0, 1}));
  CHECK(v.kind == PlaneRegion::Kind::Ellipse);
  CHECK(v.semi_major == doctest::Approx(1.0));
  CHECK(v.semi_minor == doctest::Approx(1.0));
  CHECK(v.contains({0.99, 0}));
  CHECK_FALSE(v.contains({1.01, 0}));
  CHECK(plane_obstacle_region(Line3::through({0, 0, 3}, {1, 0, 0})).kind == PlaneRegion::Kind::Empty);
  const PlaneRegion s = plane_obstacle_region(Line3::through({0, 0, 0.6}, {1, 1, 0}));
  CHECK(s.kind == PlaneRegion::Kind::Strip);
  CHECK(s.semi_minor == doctest::Approx(0.8));

  const Line3 l45 = Line3::through({0, 0, 0}, {1, 0, 1});
  CHECK(plane_obstacle_region(l45).semi_major == doctest::Approx(std::numbers::sqrt2));

  Rng rng(8);
  for (int k = 0; k < 3000; ++k) {
    const Line3 l = Line3::through({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1.5, 1.5)}, rng.unit_vector());
    const PlaneRegion r = plane_obstacle_region(l);
    for (int m = 0; m < 30; ++m) {
      const Vec2 x{rng.uniform(-8, 8), rng.uniform(-8, 8)};
      const double d = dist_point_line({x.x, x.y, 0}, l);
      if (std::abs(d - 1.0) < 1e-9) continue;
      REQUIRE(r.contains(x) == (d <= 1.0));
    }
  }
}

TEST_CASE("cluster statistics") {
  const Vec2 c{0, 0};
  const ClusterStats empty = cluster_stats(sample_poisson(0.0, Window::disk_slab(c, 20), 1), c, 20.0);
  CHECK(empty.vacant_cells == empty.total_cells);
  CHECK(empty.component_sizes.size() == 1);
  const ClusterStats busy = cluster_stats(sample_poisson(0.5, Window::disk_slab(c, 20), 3), c, 20.0);
  CHECK(busy.total_cells == busy.vacant_cells + busy.occupied_cells);
  std::size_t sum = 0;
  for (auto n : busy.component_sizes) sum += n;
  CHECK(sum == busy.vacant_cells);
}

TEST_CASE("pgm dump") {
  GridMask m(centered_grid({0, 0}, 2.0, 0.5));
  m.set(0, 0);
  const auto path = std::filesystem::temp_directory_path() / "cylperc_test.pgm";
  write_pgm(m, path.string());
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  CHECK(magic == "P5");
  CHECK(std::filesystem::file_size(path) > static_cast<std::uintmax_t>(m.spec.cells()));
  std::filesystem::remove(path);
}
