#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "cylperc/grid.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/trace.hpp"

namespace cylperc {

// Bit 1: some cell meets the disk S(x0, r_inner). Bit 2: some cell
// straddles the circle of radius r_outer around x0.
int terminal_flags(const TraceComponent& c, const GridSpec& grid, Vec2 x0, double r_inner, double r_outer);

// Incremental union-find over trace components with an inner terminal
// (cells meeting the disk S(x0, r_inner)) and an outer terminal (cells
// straddling the circle of radius r_outer).
class TraceUnion {
 public:
  TraceUnion(const GridSpec& grid, Vec2 x0, double r_inner, double r_outer);

  void add(const TraceComponent& c);
  bool connected();
  // Connectivity after adding `extra`, leaving this object unchanged.
  bool connected_with(const std::vector<TraceComponent>& extra) const;
  std::size_t components() const { return dsu_.size() - 2; }
  const GridSpec& grid() const { return grid_; }

 private:
  static constexpr std::size_t kInner = 0;
  static constexpr std::size_t kOuter = 1;

  GridSpec grid_;
  Vec2 x0_;
  double r_inner_;
  double r_outer_;
  CellMap cells_;
  DisjointSets dsu_;
};

struct ComponentGraph {
  GridSpec grid;
  std::vector<TraceComponent> nodes;
  // Pairs (a, b), a < b, of components with shared or 8-adjacent cells.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> inner_links;
  std::vector<std::size_t> outer_links;

  bool terminals_connected() const;
};

ComponentGraph build_component_graph(std::vector<TraceComponent> traces, const GridSpec& grid, Vec2 x0,
                                     double r_inner, double r_outer);

// Grid used for obstacle traces around x0 at scale a.
GridSpec trace_grid(Vec2 x0, double a, double h);

// Components of all sample cylinders meeting S(x0, a) x [0, 1000].
std::vector<TraceComponent> sample_traces(const LineSample& s, Vec2 x0, double a, double h,
                                          const SurfaceModel& surf = SurfaceModel::H());

// The crossing event: S(x0, a/10) connected to the circle of radius a
// through the obstacle traces on H.
bool obstacle_crossing(const LineSample& s, Vec2 x0, double a, double h = 0.5);

// Occupancy of the full grid around x0 (half-width r_out + 2h).
GridMask rasterize_surface(const LineSample& s, const SurfaceModel& surf, Vec2 x0, double r_out, double h);

struct AnnulusResult {
  bool vacant_crossing = false;
  bool obstacle_circuit = false;
};

// Annulus cells have center distance in [r_in, r_out]. Vacant crossing:
// 4-path of vacant annulus cells from a cell 4-adjacent to the hole to a
// cell 4-adjacent to the outside. Obstacle circuit: 8-cycle of occupied
// annulus cells with nonzero winding number around x0, found
// independently of the vacant search.
AnnulusResult analyze_annulus(const GridMask& m, Vec2 x0, double r_in, double r_out);

bool vacant_crossing(const LineSample& s, Vec2 x0, double r_in, double r_out, double h = 0.25);
bool obstacle_circuit(const LineSample& s, Vec2 x0, double r_in, double r_out, double h = 0.25);

// C(l) intersected with the plane z = 0.
struct PlaneRegion {
  enum class Kind { Empty, Ellipse, Strip };
  Kind kind = Kind::Empty;
  Vec2 center;
  // Unit vector along the major axis (ellipse) or along the strip.
  Vec2 major{1.0, 0.0};
  // Ellipse: semi-axes. Strip: semi_minor is the half-width.
  double semi_major = 0.0;
  double semi_minor = 0.0;

  bool contains(Vec2 x) const;
  // Closed x-range of the region on the horizontal line at height y.
  bool row_span(double y, double& xlo, double& xhi) const;
  // Half-extent in y (infinite for strips not parallel to the x-axis).
  double y_half_extent() const;
};

PlaneRegion plane_obstacle_region(const Line3& l);
GridMask rasterize_plane_regions(const LineSample& s, Vec2 x0, double r_out, double h);
bool plane_vacant_crossing(const LineSample& s, Vec2 x0, double r_in, double r_out, double h = 0.25);

struct ClusterStats {
  std::size_t total_cells = 0;
  std::size_t vacant_cells = 0;
  std::size_t occupied_cells = 0;
  // Sizes of vacant 4-connected components, largest first.
  std::vector<std::size_t> component_sizes;
  std::map<std::size_t, std::size_t> histogram;
};

ClusterStats cluster_stats(const LineSample& s, Vec2 center, double radius, double h = 0.25);

}  // namespace cylperc
