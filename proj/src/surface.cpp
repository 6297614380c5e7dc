#include "cylperc/surface.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <unordered_set>

#include "cylperc/errors.hpp"

namespace cylperc {

TraceUnion::TraceUnion(const GridSpec& grid, Vec2 x0, double r_inner, double r_outer)
    : grid_(grid), x0_(x0), r_inner_(r_inner), r_outer_(r_outer), cells_(1024), dsu_(2) {}

int terminal_flags(const TraceComponent& c, const GridSpec& grid, Vec2 x0, double r_inner, double r_outer) {
  // Cheap rejection on the bounding box first.
  const Vec2 lo = grid.center(c.bbox.imin, c.bbox.jmin) - Vec2{grid.h, grid.h};
  const Vec2 hi = grid.center(c.bbox.imax, c.bbox.jmax) + Vec2{grid.h, grid.h};
  const double bx = std::max({0.0, lo.x - x0.x, x0.x - hi.x});
  const double by = std::max({0.0, lo.y - x0.y, x0.y - hi.y});
  const double bmin = std::hypot(bx, by);
  const double bmax = std::hypot(std::max(std::abs(x0.x - lo.x), std::abs(hi.x - x0.x)),
                                 std::max(std::abs(x0.y - lo.y), std::abs(hi.y - x0.y)));
  const bool may_inner = bmin <= r_inner;
  const bool may_outer = bmin <= r_outer && bmax >= r_outer;
  int flags = 0;
  if (!may_inner && !may_outer) return 0;
  for (const Cell& cell : c.cells) {
    const double dmin = grid.min_dist(cell.i, cell.j, x0);
    if (may_inner && dmin <= r_inner) flags |= 1;
    if (may_outer && dmin <= r_outer && grid.max_dist(cell.i, cell.j, x0) >= r_outer) flags |= 2;
    if (flags == 3) break;
  }
  return flags;
}

void TraceUnion::add(const TraceComponent& c) {
  if (!(c.grid == grid_)) throw DomainError("TraceUnion: component rasterized on a different grid");
  const std::size_t id = dsu_.add();
  const int flags = terminal_flags(c, grid_, x0_, r_inner_, r_outer_);
  if (flags & 1) dsu_.unite(id, kInner);
  if (flags & 2) dsu_.unite(id, kOuter);
  for (const Cell& cell : c.cells)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const std::int32_t v = cells_.find(cell_key(cell.i + di, cell.j + dj));
        if (v >= 0) dsu_.unite(id, static_cast<std::size_t>(v));
      }
  for (const Cell& cell : c.cells) cells_.insert(cell_key(cell.i, cell.j), static_cast<std::int32_t>(id));
}

bool TraceUnion::connected() { return dsu_.find(kInner) == dsu_.find(kOuter); }

bool TraceUnion::connected_with(const std::vector<TraceComponent>& extra) const {
  DisjointSets dsu = dsu_;
  std::size_t total = 0;
  for (const auto& c : extra) total += c.cells.size();
  CellMap local(total);
  for (const auto& c : extra) {
    if (!(c.grid == grid_)) throw DomainError("TraceUnion: component rasterized on a different grid");
    const std::size_t id = dsu.add();
    const int flags = terminal_flags(c, grid_, x0_, r_inner_, r_outer_);
    if (flags & 1) dsu.unite(id, kInner);
    if (flags & 2) dsu.unite(id, kOuter);
    for (const Cell& cell : c.cells)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const std::uint64_t key = cell_key(cell.i + di, cell.j + dj);
          const std::int32_t v = cells_.find(key);
          if (v >= 0) dsu.unite(id, static_cast<std::size_t>(v));
          const std::int32_t w = local.find(key);
          if (w >= 0) dsu.unite(id, static_cast<std::size_t>(w));
        }
    for (const Cell& cell : c.cells) local.insert(cell_key(cell.i, cell.j), static_cast<std::int32_t>(id));
  }
  return dsu.find(kInner) == dsu.find(kOuter);
}

bool ComponentGraph::terminals_connected() const {
  // Node ids: components 0..N-1, inner N, outer N+1.
  const std::size_t n = nodes.size();
  DisjointSets dsu(n + 2);
  for (const auto& [a, b] : edges) dsu.unite(a, b);
  for (std::size_t c : inner_links) dsu.unite(c, n);
  for (std::size_t c : outer_links) dsu.unite(c, n + 1);
  return dsu.find(n) == dsu.find(n + 1);
}

ComponentGraph build_component_graph(std::vector<TraceComponent> traces, const GridSpec& grid, Vec2 x0,
                                     double r_inner, double r_outer) {
  ComponentGraph g;
  g.grid = grid;
  for (const auto& t : traces)
    if (!(t.grid == grid)) throw DomainError("build_component_graph: traces computed on mismatched grids");
  g.nodes = std::move(traces);
  std::size_t total = 0;
  for (const auto& t : g.nodes) total += t.cells.size();
  CellMap owner(total);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const auto& t = g.nodes[id];
    for (const Cell& cell : t.cells)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const std::int32_t v = owner.find(cell_key(cell.i + di, cell.j + dj));
          if (v < 0 || static_cast<std::size_t>(v) == id) continue;
          const std::uint64_t pair_key = (static_cast<std::uint64_t>(v) << 32) | id;
          if (seen.insert(pair_key).second) g.edges.emplace_back(static_cast<std::size_t>(v), id);
        }
    for (const Cell& cell : t.cells) owner.insert(cell_key(cell.i, cell.j), static_cast<std::int32_t>(id));
    const int flags = terminal_flags(t, grid, x0, r_inner, r_outer);
    if (flags & 1) g.inner_links.push_back(id);
    if (flags & 2) g.outer_links.push_back(id);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

GridSpec trace_grid(Vec2 x0, double a, double h) { return centered_grid(x0, a + 2.0 * h, h); }

std::vector<TraceComponent> sample_traces(const LineSample& s, Vec2 x0, double a, double h,
                                          const SurfaceModel& surf) {
  const Window query = Window::disk_slab(x0, a, 0.0, kSlabHeight);
  if (!covers(s.window, query)) throw CoverageError("sample_traces: sample does not cover S(x0, a) x [0, 1000]");
  const GridSpec grid = trace_grid(x0, a, h);
  const DiskClip clip{true, x0, a};
  std::vector<TraceComponent> out;
  for (std::size_t id = 0; id < s.lines.size(); ++id) {
    if (!hits_region(s.lines[id], query)) continue;
    auto comps = trace_cylinder(s.lines[id], surf, grid, clip, id);
    for (auto& c : comps) out.push_back(std::move(c));
  }
  return out;
}

bool obstacle_crossing(const LineSample& s, Vec2 x0, double a, double h) {
  if (!(a > 0.0)) throw DomainError("obstacle_crossing: scale must be positive");
  if (!(h > 0.0 && h <= 0.5)) throw DomainError("obstacle_crossing: need 0 < h <= 0.5");
  TraceUnion tu(trace_grid(x0, a, h), x0, a / 10.0, a);
  for (const auto& c : sample_traces(s, x0, a, h)) {
    tu.add(c);
    if (tu.connected()) return true;
  }
  return tu.connected();
}

namespace {

void check_annulus_args(double r_in, double r_out, double h) {
  if (!(h > 0.0)) throw DomainError("annulus: cell size must be positive");
  if (!(r_in >= 2.0 * h)) throw DomainError("annulus: need r_in >= 2h");
  if (!(r_out - r_in >= 4.0 * h)) throw DomainError("annulus: need r_out - r_in >= 4h");
}

}  // namespace

GridMask rasterize_surface(const LineSample& s, const SurfaceModel& surf, Vec2 x0, double r_out, double h) {
  GridMask m(centered_grid(x0, r_out + 2.0 * h, h));
  const DiskClip clip{true, x0, r_out + h};
  for (const Line3& l : s.lines)
    rasterize_cylinder(l, surf, m.spec, clip, [&](std::int64_t i, std::int64_t j) { m.set(i, j); });
  return m;
}

AnnulusResult analyze_annulus(const GridMask& m, Vec2 x0, double r_in, double r_out) {
  const GridSpec& g = m.spec;
  const std::int64_t nx = g.nx, ny = g.ny;
  const double rin2 = r_in * r_in, rout2 = r_out * r_out;
  // 0 hole, 1 annulus, 2 outside.
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(nx * ny));
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      const Vec2 c = g.center(i, j);
      const double d2 = norm2(c - x0);
      cls[static_cast<std::size_t>(j * nx + i)] = d2 < rin2 ? 0 : (d2 > rout2 ? 2 : 1);
    }
  auto cls_at = [&](std::int64_t i, std::int64_t j) -> int {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return 2;
    return cls[static_cast<std::size_t>(j * nx + i)];
  };
  static constexpr int D4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto touches = [&](std::int64_t i, std::int64_t j, int kind) {
    for (const auto& d : D4)
      if (cls_at(i + d[0], j + d[1]) == kind) return true;
    return false;
  };

  AnnulusResult res;

  // Vacant 4-connected search from the inner ring.
  {
    std::vector<std::uint8_t> seen(cls.size(), 0);
    std::vector<std::int64_t> queue;
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const auto idx = static_cast<std::size_t>(j * nx + i);
        if (cls[idx] == 1 && !m.occupied[idx] && touches(i, j, 0)) {
          seen[idx] = 1;
          queue.push_back(j * nx + i);
        }
      }
    for (std::size_t head = 0; head < queue.size() && !res.vacant_crossing; ++head) {
      const std::int64_t i = queue[head] % nx, j = queue[head] / nx;
      if (touches(i, j, 2)) {
        res.vacant_crossing = true;
        break;
      }
      for (const auto& d : D4) {
        const std::int64_t a = i + d[0], b = j + d[1];
        if (cls_at(a, b) != 1) continue;
        const auto idx = static_cast<std::size_t>(b * nx + a);
        if (seen[idx] || m.occupied[idx]) continue;
        seen[idx] = 1;
        queue.push_back(b * nx + a);
      }
    }
  }

  // Occupied 8-connected search lifting to the cover cut along the ray
  // {y = x0.y, x > x0.x}; two lifts of one cell close a winding cycle.
  {
    constexpr std::int32_t kUnset = INT32_MIN;
    std::vector<std::int32_t> pot(cls.size(), kUnset);
    std::vector<std::int64_t> queue;
    auto crossing = [&](Vec2 p, Vec2 q) -> int {
      const bool pb = p.y < x0.y, qb = q.y < x0.y;
      if (pb == qb) return 0;
      const double xi = p.x + (x0.y - p.y) * (q.x - p.x) / (q.y - p.y);
      if (!(xi > x0.x)) return 0;
      return pb ? 1 : -1;
    };
    for (std::int64_t start = 0; start < nx * ny && !res.obstacle_circuit; ++start) {
      const auto sidx = static_cast<std::size_t>(start);
      if (cls[sidx] != 1 || !m.occupied[sidx] || pot[sidx] != kUnset) continue;
      pot[sidx] = 0;
      queue.clear();
      queue.push_back(start);
      for (std::size_t head = 0; head < queue.size() && !res.obstacle_circuit; ++head) {
        const std::int64_t i = queue[head] % nx, j = queue[head] / nx;
        const std::int32_t pc = pot[static_cast<std::size_t>(queue[head])];
        const Vec2 c = g.center(i, j);
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const std::int64_t a = i + di, b = j + dj;
            if (cls_at(a, b) != 1) continue;
            const auto idx = static_cast<std::size_t>(b * nx + a);
            if (!m.occupied[idx]) continue;
            const std::int32_t expect = pc + crossing(c, g.center(a, b));
            if (pot[idx] == kUnset) {
              pot[idx] = expect;
              queue.push_back(b * nx + a);
            } else if (pot[idx] != expect) {
              res.obstacle_circuit = true;
            }
          }
      }
    }
  }
  return res;
}

bool vacant_crossing(const LineSample& s, Vec2 x0, double r_in, double r_out, double h) {
  check_annulus_args(r_in, r_out, h);
  if (r_out > 500.0) throw DomainError("vacant_crossing: r_out must be <= 500");
  if (!covers(s.window, Window::disk_slab(x0, r_out, 0.0, kSlabHeight)))
    throw CoverageError("vacant_crossing: sample does not cover the annulus");
  return analyze_annulus(rasterize_surface(s, SurfaceModel::H(), x0, r_out, h), x0, r_in, r_out).vacant_crossing;
}

bool obstacle_circuit(const LineSample& s, Vec2 x0, double r_in, double r_out, double h) {
  check_annulus_args(r_in, r_out, h);
  if (r_out > 500.0) throw DomainError("obstacle_circuit: r_out must be <= 500");
  if (!covers(s.window, Window::disk_slab(x0, r_out, 0.0, kSlabHeight)))
    throw CoverageError("obstacle_circuit: sample does not cover the annulus");
  return analyze_annulus(rasterize_surface(s, SurfaceModel::H(), x0, r_out, h), x0, r_in, r_out).obstacle_circuit;
}

bool PlaneRegion::contains(Vec2 x) const {
  const Vec2 v = x - center;
  const double b = dot(v, perp(major));
  switch (kind) {
    case Kind::Empty:
      return false;
    case Kind::Strip:
      return std::abs(b) <= semi_minor;
    case Kind::Ellipse: {
      const double a = dot(v, major) / semi_major;
      const double bb = b / semi_minor;
      return a * a + bb * bb <= 1.0;
    }
  }
  return false;
}

bool PlaneRegion::row_span(double y, double& xlo, double& xhi) const {
  const Vec2 e = major;
  const double Y = y - center.y;
  if (kind == Kind::Empty) return false;
  if (kind == Kind::Strip) {
    // b = -t e.y + Y e.x with t = x - center.x.
    if (std::abs(e.y) < 1e-15) {
      if (std::abs(Y * e.x) > semi_minor) return false;
      xlo = -INFINITY;
      xhi = INFINITY;
      return true;
    }
    double t1 = (Y * e.x - semi_minor) / e.y;
    double t2 = (Y * e.x + semi_minor) / e.y;
    if (t1 > t2) std::swap(t1, t2);
    xlo = center.x + t1;
    xhi = center.x + t2;
    return true;
  }
  const double M2 = semi_major * semi_major, m2 = semi_minor * semi_minor;
  const double A = e.x * e.x / M2 + e.y * e.y / m2;
  const double B = 2.0 * Y * e.x * e.y * (1.0 / M2 - 1.0 / m2);
  const double C = Y * Y * (e.y * e.y / M2 + e.x * e.x / m2) - 1.0;
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  xlo = center.x + (-B - sq) / (2.0 * A);
  xhi = center.x + (-B + sq) / (2.0 * A);
  return true;
}

double PlaneRegion::y_half_extent() const {
  switch (kind) {
    case Kind::Empty:
      return 0.0;
    case Kind::Strip:
      return std::abs(major.y) < 1e-15 ? semi_minor : INFINITY;
    case Kind::Ellipse:
      return std::hypot(semi_major * major.y, semi_minor * major.x);
  }
  return 0.0;
}

PlaneRegion plane_obstacle_region(const Line3& l) {
  PlaneRegion r;
  const Vec3& a = l.anchor;
  const Vec3& d = l.dir;
  const double dh = std::hypot(d.x, d.y);
  if (std::abs(d.z) < 1e-12) {
    // Horizontal axis: slice of a cylinder parallel to the plane.
    if (std::abs(a.z) > 1.0) return r;
    r.kind = PlaneRegion::Kind::Strip;
    r.center = {a.x, a.y};
    r.major = {d.x / dh, d.y / dh};
    r.semi_major = INFINITY;
    r.semi_minor = std::sqrt(1.0 - a.z * a.z);
    return r;
  }
  const double t = -a.z / d.z;
  r.kind = PlaneRegion::Kind::Ellipse;
  r.center = {a.x + t * d.x, a.y + t * d.y};
  r.major = dh > 0.0 ? Vec2{d.x / dh, d.y / dh} : Vec2{1.0, 0.0};
  r.semi_major = 1.0 / std::abs(d.z);
  r.semi_minor = 1.0;
  return r;
}

GridMask rasterize_plane_regions(const LineSample& s, Vec2 x0, double r_out, double h) {
  GridMask m(centered_grid(x0, r_out + 2.0 * h, h));
  const GridSpec& g = m.spec;
  for (const Line3& l : s.lines) {
    const PlaneRegion reg = plane_obstacle_region(l);
    if (reg.kind == PlaneRegion::Kind::Empty) continue;
    const double ext = reg.y_half_extent();
    double jlo = 0.0, jhi = static_cast<double>(g.ny - 1);
    if (std::isfinite(ext)) {
      jlo = std::max(jlo, std::ceil((reg.center.y - ext - g.origin.y) / h - 0.5) - 1.0);
      jhi = std::min(jhi, std::floor((reg.center.y + ext - g.origin.y) / h - 0.5) + 1.0);
    }
    for (auto j = static_cast<std::int64_t>(jlo); j <= static_cast<std::int64_t>(jhi); ++j) {
      const double yc = g.origin.y + (static_cast<double>(j) + 0.5) * h;
      double xlo, xhi;
      if (!reg.row_span(yc, xlo, xhi)) continue;
      const double ilo = std::max(0.0, std::ceil((xlo - g.origin.x) / h - 0.5) - 1.0);
      const double ihi = std::min(static_cast<double>(g.nx - 1), std::floor((xhi - g.origin.x) / h - 0.5) + 1.0);
      for (auto i = static_cast<std::int64_t>(ilo); i <= static_cast<std::int64_t>(ihi); ++i)
        if (reg.contains(g.center(i, j))) m.set(i, j);
    }
  }
  return m;
}

bool plane_vacant_crossing(const LineSample& s, Vec2 x0, double r_in, double r_out, double h) {
  check_annulus_args(r_in, r_out, h);
  if (r_out > 500.0) throw DomainError("plane_vacant_crossing: r_out must be <= 500");
  if (!covers(s.window, Window::disk_slab(x0, r_out, 0.0, 0.0)))
    throw CoverageError("plane_vacant_crossing: sample does not cover the annulus");
  return analyze_annulus(rasterize_plane_regions(s, x0, r_out, h), x0, r_in, r_out).vacant_crossing;
}

ClusterStats cluster_stats(const LineSample& s, Vec2 center, double radius, double h) {
  if (!(radius > 0.0 && radius <= 500.0)) throw DomainError("cluster_stats: radius must be in (0, 500]");
  if (!covers(s.window, Window::disk_slab(center, radius, 0.0, kSlabHeight)))
    throw CoverageError("cluster_stats: sample does not cover the window");
  const GridMask m = rasterize_surface(s, SurfaceModel::H(), center, radius, h);
  const GridSpec& g = m.spec;
  const std::int64_t nx = g.nx, ny = g.ny;
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(nx * ny), 0);
  ClusterStats st;
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i)
      if (norm2(g.center(i, j) - center) <= radius * radius) {
        const auto idx = static_cast<std::size_t>(j * nx + i);
        inside[idx] = 1;
        ++st.total_cells;
        if (m.occupied[idx]) ++st.occupied_cells;
        else ++st.vacant_cells;
      }
  std::vector<std::uint8_t> seen(inside.size(), 0);
  std::vector<std::int64_t> queue;
  static constexpr int D4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::int64_t start = 0; start < nx * ny; ++start) {
    const auto sidx = static_cast<std::size_t>(start);
    if (!inside[sidx] || m.occupied[sidx] || seen[sidx]) continue;
    seen[sidx] = 1;
    queue.assign(1, start);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::int64_t i = queue[head] % nx, j = queue[head] / nx;
      for (const auto& d : D4) {
        const std::int64_t a = i + d[0], b = j + d[1];
        if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
        const auto idx = static_cast<std::size_t>(b * nx + a);
        if (!inside[idx] || m.occupied[idx] || seen[idx]) continue;
        seen[idx] = 1;
        queue.push_back(b * nx + a);
      }
    }
    st.component_sizes.push_back(queue.size());
    ++st.histogram[queue.size()];
  }
  std::sort(st.component_sizes.rbegin(), st.component_sizes.rend());
  return st;
}

}  // namespace cylperc
