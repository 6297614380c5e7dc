#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cylperc/vec.hpp"

namespace cylperc {

struct Cell {
  std::int32_t i = 0;
  std::int32_t j = 0;
  friend bool operator==(Cell a, Cell b) { return a.i == b.i && a.j == b.j; }
  friend bool operator<(Cell a, Cell b) { return a.j != b.j ? a.j < b.j : a.i < b.i; }
};

inline std::uint64_t cell_key(std::int32_t i, std::int32_t j) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
}

// Square lattice of cells [origin + (i, j) h, origin + (i + 1, j + 1) h).
struct GridSpec {
  Vec2 origin;
  double h = 0.5;
  std::int64_t nx = 0;
  std::int64_t ny = 0;

  Vec2 center(std::int64_t i, std::int64_t j) const {
    return {origin.x + (static_cast<double>(i) + 0.5) * h, origin.y + (static_cast<double>(j) + 0.5) * h};
  }
  std::int64_t cells() const { return nx * ny; }
  bool contains(std::int64_t i, std::int64_t j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  // Smallest and largest distance from p to the closed cell square.
  double min_dist(std::int64_t i, std::int64_t j, Vec2 p) const;
  double max_dist(std::int64_t i, std::int64_t j, Vec2 p) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.origin == b.origin && a.h == b.h && a.nx == b.nx && a.ny == b.ny;
  }
};

// Grid covering the square of half-width `half_width` around x0. The
// lattice depends only on (x0, h), so grids of different extent around the
// same x0 share cell centers.
GridSpec centered_grid(Vec2 x0, double half_width, double h);

struct GridMask {
  GridSpec spec;
  std::vector<std::uint8_t> occupied;

  explicit GridMask(const GridSpec& g);
  bool at(std::int64_t i, std::int64_t j) const { return occupied[static_cast<std::size_t>(j * spec.nx + i)] != 0; }
  void set(std::int64_t i, std::int64_t j) { occupied[static_cast<std::size_t>(j * spec.nx + i)] = 1; }
};

// Binary PGM (P5): vacant cells white, occupied black, row 0 at the top.
void write_pgm(const GridMask& m, const std::string& path);

// Open-addressing map from cell keys to 32-bit values.
class CellMap {
 public:
  explicit CellMap(std::size_t expected = 16);
  // Returns the stored value, or -1 when absent.
  std::int32_t find(std::uint64_t key) const;
  // Inserts if absent; returns the value now stored.
  std::int32_t insert(std::uint64_t key, std::int32_t value);
  std::size_t size() const { return size_; }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  void grow();
  std::vector<std::uint64_t> keys_;
  std::vector<std::int32_t> values_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0);
  std::size_t add();
  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace cylperc
