#include "cylperc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cylperc/errors.hpp"
#include "cylperc/rng.hpp"

namespace cylperc {

double GridSpec::min_dist(std::int64_t i, std::int64_t j, Vec2 p) const {
  const double x0 = origin.x + static_cast<double>(i) * h;
  const double y0 = origin.y + static_cast<double>(j) * h;
  const double dx = std::max({0.0, x0 - p.x, p.x - (x0 + h)});
  const double dy = std::max({0.0, y0 - p.y, p.y - (y0 + h)});
  return std::hypot(dx, dy);
}

double GridSpec::max_dist(std::int64_t i, std::int64_t j, Vec2 p) const {
  const double x0 = origin.x + static_cast<double>(i) * h;
  const double y0 = origin.y + static_cast<double>(j) * h;
  const double dx = std::max(std::abs(p.x - x0), std::abs(p.x - (x0 + h)));
  const double dy = std::max(std::abs(p.y - y0), std::abs(p.y - (y0 + h)));
  return std::hypot(dx, dy);
}

GridSpec centered_grid(Vec2 x0, double half_width, double h) {
  if (!(h > 0.0)) throw DomainError("grid: cell size must be positive");
  if (!(half_width > 0.0)) throw DomainError("grid: extent must be positive");
  const double k = std::ceil(half_width / h);
  if (2.0 * k > 2e9) throw ResourceLimit("grid: index range exceeds 32 bits");
  GridSpec g;
  g.h = h;
  g.origin = {x0.x - k * h, x0.y - k * h};
  g.nx = g.ny = static_cast<std::int64_t>(2.0 * k);
  return g;
}

GridMask::GridMask(const GridSpec& g) : spec(g) {
  if (g.cells() > 100'000'000) throw ResourceLimit("grid: more than 1e8 cells");
  occupied.assign(static_cast<std::size_t>(g.cells()), 0);
}

void write_pgm(const GridMask& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << m.spec.nx << ' ' << m.spec.ny << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(m.spec.nx));
  for (std::int64_t j = m.spec.ny - 1; j >= 0; --j) {
    for (std::int64_t i = 0; i < m.spec.nx; ++i) row[static_cast<std::size_t>(i)] = m.at(i, j) ? 0 : static_cast<char>(255);
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

CellMap::CellMap(std::size_t expected) {
  std::size_t cap = 16;
  while (cap < 2 * expected) cap <<= 1;
  keys_.assign(cap, kEmpty);
  values_.assign(cap, 0);
  mask_ = cap - 1;
}

std::int32_t CellMap::find(std::uint64_t key) const {
  std::size_t pos = mix64(key) & mask_;
  for (;;) {
    const std::uint64_t k = keys_[pos];
    if (k == key) return values_[pos];
    if (k == kEmpty) return -1;
    pos = (pos + 1) & mask_;
  }
}

std::int32_t CellMap::insert(std::uint64_t key, std::int32_t value) {
  if (2 * (size_ + 1) > keys_.size()) grow();
  std::size_t pos = mix64(key) & mask_;
  for (;;) {
    const std::uint64_t k = keys_[pos];
    if (k == key) return values_[pos];
    if (k == kEmpty) {
      keys_[pos] = key;
      values_[pos] = value;
      ++size_;
      return value;
    }
    pos = (pos + 1) & mask_;
  }
}

void CellMap::grow() {
  std::vector<std::uint64_t> old_keys;
  std::vector<std::int32_t> old_values;
  old_keys.swap(keys_);
  old_values.swap(values_);
  keys_.assign(old_keys.size() * 2, kEmpty);
  values_.assign(old_keys.size() * 2, 0);
  mask_ = keys_.size() - 1;
  size_ = 0;
  for (std::size_t p = 0; p < old_keys.size(); ++p)
    if (old_keys[p] != kEmpty) insert(old_keys[p], old_values[p]);
}

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
  for (std::size_t k = 0; k < n; ++k) parent_[k] = k;
}

std::size_t DisjointSets::add() {
  parent_.push_back(parent_.size());
  rank_.push_back(0);
  return parent_.size() - 1;
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void DisjointSets::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

}  // namespace cylperc
