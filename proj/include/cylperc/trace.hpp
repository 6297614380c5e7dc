#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cylperc/geometry.hpp"
#include "cylperc/grid.hpp"

namespace cylperc {

// Height field carrying the obstacle traces: the surface H or the plane z=0.
class SurfaceModel {
 public:
  static SurfaceModel H(const HexTiling& t = HexTiling());
  static SurfaceModel plane();

  bool is_plane() const { return plane_; }
  double height(Vec2 x) const { return plane_ ? 0.0 : tiling_.dist_to_boundary(x); }
  Vec3 lift(Vec2 x) const { return {x.x, x.y, height(x)}; }
  double lipschitz() const { return plane_ ? 0.0 : 1.0; }
  double min_height() const { return 0.0; }
  double max_height() const { return plane_ ? 0.0 : tiling_.apothem(); }
  const HexTiling& tiling() const { return tiling_; }

 private:
  bool plane_ = false;
  HexTiling tiling_;
};

// Restricts rasterization to cells whose square meets the disk, when set.
struct DiskClip {
  bool active = false;
  Vec2 center;
  double radius = 0.0;
  bool keeps(const GridSpec& g, std::int64_t i, std::int64_t j) const {
    return !active || g.min_dist(i, j, center) <= radius;
  }
};

// Calls fn(i, j) for every grid cell whose lifted center lies in C(axis).
// Only cells in a strip around the projected axis are examined; the
// strip is pruned by a Lipschitz bound on the lifted height gap.
void rasterize_cylinder(const Line3& axis, const SurfaceModel& surf, const GridSpec& grid, const DiskClip& clip,
                        const std::function<void(std::int64_t, std::int64_t)>& fn);

struct CellBox {
  std::int32_t imin = 0, jmin = 0, imax = -1, jmax = -1;
};

struct TraceComponent {
  std::size_t cylinder_id = 0;
  GridSpec grid;
  std::vector<Cell> cells;
  CellBox bbox;
};

// Splits a cell set into 8-connected components.
std::vector<TraceComponent> split_components(std::vector<Cell> cells, std::size_t cylinder_id);

std::vector<TraceComponent> trace_cylinder(const Line3& axis, const SurfaceModel& surf, const GridSpec& grid,
                                           const DiskClip& clip, std::size_t cylinder_id = 0);

// Trace on H inside the disk S(center, radius), on centered_grid(center, radius + 2h, h).
std::vector<TraceComponent> trace_cylinder_on_H(const Line3& axis, Vec2 center, double radius, double h,
                                                std::size_t cylinder_id = 0);

// Longest distance between centers of two cells of the component.
double component_diameter(const TraceComponent& c, const GridSpec& grid);

}  // namespace cylperc
