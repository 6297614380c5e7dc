#include "cylperc/trace.hpp"

#include <algorithm>
#include <cmath>

#include "cylperc/errors.hpp"

namespace cylperc {

SurfaceModel SurfaceModel::H(const HexTiling& t) {
  SurfaceModel s;
  s.plane_ = false;
  s.tiling_ = t;
  return s;
}

SurfaceModel SurfaceModel::plane() {
  SurfaceModel s;
  s.plane_ = true;
  return s;
}

namespace {

// Visits candidate cells row by row. span(yc, xlo, xhi) returns the
// closed x-range of candidate centers in the row at height yc.
template <class Span, class Visit>
void scan_rows(const GridSpec& g, double ylo, double yhi, Span&& span, Visit&& visit) {
  const double jlo = std::ceil((ylo - g.origin.y) / g.h - 0.5) - 1.0;
  const double jhi = std::floor((yhi - g.origin.y) / g.h - 0.5) + 1.0;
  const auto j0 = static_cast<std::int64_t>(std::max(0.0, jlo));
  const auto j1 = static_cast<std::int64_t>(std::min(static_cast<double>(g.ny - 1), jhi));
  for (std::int64_t j = j0; j <= j1; ++j) {
    const double yc = g.origin.y + (static_cast<double>(j) + 0.5) * g.h;
    double xlo = -INFINITY, xhi = INFINITY;
    if (!span(yc, xlo, xhi)) continue;
    const double ilo = std::ceil((xlo - g.origin.x) / g.h - 0.5) - 1.0;
    const double ihi = std::floor((xhi - g.origin.x) / g.h - 0.5) + 1.0;
    const auto i0 = static_cast<std::int64_t>(std::max(0.0, ilo));
    const auto i1 = static_cast<std::int64_t>(std::min(static_cast<double>(g.nx - 1), ihi));
    for (std::int64_t i = i0; i <= i1; ++i) visit(i, j);
  }
}

// Intersects [xlo, xhi] with {x : lo <= alpha x + beta <= hi}.
bool clip_linear(double alpha, double beta, double lo, double hi, double& xlo, double& xhi) {
  if (std::abs(alpha) < 1e-15) return beta >= lo && beta <= hi;
  double a = (lo - beta) / alpha;
  double b = (hi - beta) / alpha;
  if (a > b) std::swap(a, b);
  xlo = std::max(xlo, a);
  xhi = std::min(xhi, b);
  return xlo <= xhi;
}

}  // namespace

void rasterize_cylinder(const Line3& axis, const SurfaceModel& surf, const GridSpec& grid, const DiskClip& clip,
                        const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const Cylinder cyl(axis, 1.0);
  const double h = grid.h;
  auto test = [&](std::int64_t i, std::int64_t j) {
    if (!clip.keeps(grid, i, j)) return;
    if (cylinder_contains(cyl, surf.lift(grid.center(i, j)))) fn(i, j);
  };
  const Vec3& a = axis.anchor;
  const Vec3& d = axis.dir;
  const double dh = std::hypot(d.x, d.y);

  if (dh < 1e-6) {
    const double zmid = 0.5 * (surf.min_height() + surf.max_height());
    const double t = (zmid - a.z) / d.z;
    const Vec2 pc{a.x + t * d.x, a.y + t * d.y};
    const double drift = dh / std::abs(d.z) * (0.5 * (surf.max_height() - surf.min_height()) + 1.0);
    const double rc = 1.0 + 2.0 * h + drift;
    scan_rows(
        grid, pc.y - rc, pc.y + rc,
        [&](double yc, double& xlo, double& xhi) {
          const double dy = yc - pc.y;
          if (std::abs(dy) > rc) return false;
          const double half = std::sqrt(rc * rc - dy * dy);
          xlo = pc.x - half;
          xhi = pc.x + half;
          return true;
        },
        test);
    return;
  }

  const Vec2 e{d.x / dh, d.y / dh};
  const Vec2 n = perp(e);
  const Vec2 p0{a.x, a.y};
  const double k = d.z / dh;
  const double z0 = a.z;
  const double L = surf.lipschitz();
  // |g| <= T is necessary for occupancy of a cell with |w| <= 1.
  const double T = 1.0 / dh + L + 1e-7;
  const double Lg = L + std::abs(k);

  // Range of the axis parameter s over the grid rectangle.
  double s_lo = INFINITY, s_hi = -INFINITY;
  const double X[2] = {grid.origin.x, grid.origin.x + static_cast<double>(grid.nx) * h};
  const double Y[2] = {grid.origin.y, grid.origin.y + static_cast<double>(grid.ny) * h};
  for (double x : X)
    for (double y : Y) {
      const double s = dot(Vec2{x, y} - p0, e);
      s_lo = std::min(s_lo, s);
      s_hi = std::max(s_hi, s);
    }
  s_lo -= 2.0;
  s_hi += 2.0;
  if (clip.active) {
    const double rr = clip.radius + h + 1.0;
    const double sc = dot(clip.center - p0, e);
    const double off = dot(clip.center - p0, n);
    if (std::abs(off) > rr) return;
    const double half = std::sqrt(rr * rr - off * off);
    s_lo = std::max(s_lo, sc - half);
    s_hi = std::min(s_hi, sc + half);
  }
  if (k != 0.0) {
    double t1 = (surf.min_height() - T - z0) / k;
    double t2 = (surf.max_height() + T - z0) / k;
    if (t1 > t2) std::swap(t1, t2);
    s_lo = std::max(s_lo, t1);
    s_hi = std::min(s_hi, t2);
  } else if (z0 < surf.min_height() - T || z0 > surf.max_height() + T) {
    return;
  }
  if (!(s_lo <= s_hi)) return;

  // March along s, skipping stretches where |g| provably exceeds T.
  std::vector<std::pair<double, double>> active;
  double s = s_lo;
  while (s <= s_hi) {
    const Vec2 p = p0 + s * e;
    const double g = surf.height(p) - (z0 + k * s);
    const double excess = std::abs(g) - T;
    if (Lg > 0.0 && excess > Lg * h) {
      s += excess / Lg;
      continue;
    }
    if (Lg == 0.0 && excess > 0.0) break;
    const double lo = std::max(s_lo, s - h);
    const double hi = std::min(s_hi, s + h);
    if (!active.empty() && lo <= active.back().second + h) active.back().second = hi;
    else active.emplace_back(lo, hi);
    s += h;
  }

  const double wmax = 1.0 + 1e-9;
  for (const auto& [sa, sb] : active) {
    double ylo = INFINITY, yhi = -INFINITY;
    for (double sv : {sa, sb})
      for (double wv : {-wmax, wmax}) {
        const double y = p0.y + sv * e.y + wv * n.y;
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      }
    scan_rows(
        grid, ylo, yhi,
        [&](double yc, double& xlo, double& xhi) {
          // s(x) = (x - p0.x) e.x + (yc - p0.y) e.y, w(x) likewise with n.
          if (!clip_linear(e.x, (yc - p0.y) * e.y - p0.x * e.x, sa, sb, xlo, xhi)) return false;
          return clip_linear(n.x, (yc - p0.y) * n.y - p0.x * n.x, -wmax, wmax, xlo, xhi);
        },
        test);
  }
}

std::vector<TraceComponent> split_components(std::vector<Cell> cells, std::size_t cylinder_id) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<TraceComponent> out;
  if (cells.empty()) return out;
  CellMap index(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) index.insert(cell_key(cells[k].i, cells[k].j), static_cast<std::int32_t>(k));
  std::vector<std::uint8_t> seen(cells.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (seen[k]) continue;
    TraceComponent comp;
    comp.cylinder_id = cylinder_id;
    comp.bbox = {cells[k].i, cells[k].j, cells[k].i, cells[k].j};
    seen[k] = 1;
    stack.push_back(k);
    while (!stack.empty()) {
      const Cell c = cells[stack.back()];
      stack.pop_back();
      comp.cells.push_back(c);
      comp.bbox.imin = std::min(comp.bbox.imin, c.i);
      comp.bbox.imax = std::max(comp.bbox.imax, c.i);
      comp.bbox.jmin = std::min(comp.bbox.jmin, c.j);
      comp.bbox.jmax = std::max(comp.bbox.jmax, c.j);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const std::int32_t v = index.find(cell_key(c.i + di, c.j + dj));
          if (v >= 0 && !seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            stack.push_back(static_cast<std::size_t>(v));
          }
        }
    }
    std::sort(comp.cells.begin(), comp.cells.end());
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<TraceComponent> trace_cylinder(const Line3& axis, const SurfaceModel& surf, const GridSpec& grid,
                                           const DiskClip& clip, std::size_t cylinder_id) {
  std::vector<Cell> cells;
  rasterize_cylinder(axis, surf, grid, clip, [&](std::int64_t i, std::int64_t j) {
    cells.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
  });
  auto comps = split_components(std::move(cells), cylinder_id);
  for (auto& c : comps) c.grid = grid;
  return comps;
}

std::vector<TraceComponent> trace_cylinder_on_H(const Line3& axis, Vec2 center, double radius, double h,
                                                std::size_t cylinder_id) {
  if (!(h > 0.0 && h <= 0.5)) throw DomainError("trace_cylinder_on_H: need 0 < h <= 0.5");
  const GridSpec g = centered_grid(center, radius + 2.0 * h, h);
  return trace_cylinder(axis, SurfaceModel::H(), g, DiskClip{true, center, radius}, cylinder_id);
}

double component_diameter(const TraceComponent& c, const GridSpec& grid) {
  // Convex hull of the centers, then all hull pairs.
  std::vector<Vec2> pts;
  pts.reserve(c.cells.size());
  for (const Cell& cell : c.cells) pts.push_back(grid.center(cell.i, cell.j));
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  if (pts.size() < 3) return pts.size() == 2 ? norm(pts[1] - pts[0]) : 0.0;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, norm(hull[i] - hull[j]));
  return best;
}

}  // namespace cylperc
