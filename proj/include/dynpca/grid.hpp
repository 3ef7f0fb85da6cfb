#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/linalg.hpp"

namespace dynpca {

template <std::size_t D>
using CellIndex = std::array<std::int64_t, D>;

struct CellIndexHash {
  template <std::size_t D>
  std::size_t operator()(const CellIndex<D>& c) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Coordinate of lattice line k. Multiplying by a power of two is exact, so
/// lattices with spacing eps, 2 eps, 4 eps share their coarse lines bit for bit.
inline double lattice_coord(std::int64_t k, double eps) { return static_cast<double>(k) * eps; }

/// floor((p - origin) / eps) per axis, corrected so that the computed cell
/// bounds satisfy origin + k eps <= p < origin + (k + 1) eps in floating
/// point. Points on a cell boundary go to the higher-index cell.
template <std::size_t D>
CellIndex<D> cell_of(const Vec<D>& p, double eps, const Vec<D>& origin) {
  CellIndex<D> idx{};
  for (std::size_t i = 0; i < D; ++i) {
    auto k = static_cast<std::int64_t>(std::floor((p[i] - origin[i]) / eps));
    while (origin[i] + lattice_coord(k, eps) > p[i]) --k;
    while (origin[i] + lattice_coord(k + 1, eps) <= p[i]) ++k;
    idx[i] = k;
  }
  return idx;
}

/// Uniform occupancy grid of eps-sized cells with per-cell point counts.
///
/// Cells live on the global lattice {k eps}; the origin is a whole number of
/// cells (`origin_cells`) and only shifts the reported indices. With
/// `track_points` each cell also keeps the points it holds, which the tight
/// box refinement needs.
///
/// Readers may run concurrently; mutation needs exclusive access.
template <std::size_t D>
class OccupancyGrid {
 public:
  struct Cell {
    std::uint64_t count = 0;
    std::vector<Vec<D>> points;
  };
  using CellMap = std::unordered_map<CellIndex<D>, Cell, CellIndexHash>;

  explicit OccupancyGrid(double eps, CellIndex<D> origin_cells = {}, bool track_points = false)
      : eps_(eps), origin_cells_(origin_cells), track_(track_points) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidArgument, "grid epsilon must be positive");
  }

  /// Grid whose origin is the cell containing the component-wise minimum of
  /// `points`, filled with `points`.
  static OccupancyGrid anchored(double eps, std::span<const Vec<D>> points, bool track_points = false) {
    CellIndex<D> origin{};
    if (!points.empty()) {
      Vec<D> lo = points[0];
      for (const auto& p : points)
        for (std::size_t i = 0; i < D; ++i) lo[i] = std::min(lo[i], p[i]);
      origin = dynpca::cell_of(lo, eps, Vec<D>{});
    }
    OccupancyGrid g(eps, origin, track_points);
    for (const auto& p : points) g.insert(p);
    return g;
  }

  double epsilon() const { return eps_; }
  const CellIndex<D>& origin_cells() const { return origin_cells_; }
  bool tracks_points() const { return track_; }

  Vec<D> origin() const {
    Vec<D> o{};
    for (std::size_t i = 0; i < D; ++i) o[i] = lattice_coord(origin_cells_[i], eps_);
    return o;
  }

  /// Index relative to the grid origin.
  CellIndex<D> cell_of(const Vec<D>& p) const {
    CellIndex<D> c = dynpca::cell_of(p, eps_, Vec<D>{});
    for (std::size_t i = 0; i < D; ++i) c[i] -= origin_cells_[i];
    return c;
  }

  /// Coordinate of the lattice line `offset` cells above relative index `rel`
  /// along `axis`.
  double coord(std::size_t axis, std::int64_t rel, std::int64_t offset = 0) const {
    return lattice_coord(rel + origin_cells_[axis] + offset, eps_);
  }

  void insert(const Vec<D>& p) {
    if (!is_finite(p)) throw Error(ErrorCode::NonFinite, "grid point is not finite");
    Cell& c = cells_[cell_of(p)];
    ++c.count;
    if (track_) c.points.push_back(p);
    ++points_;
  }

  /// Throws NotPresent if the cell of `p` is empty (or, when tracking, `p`
  /// itself is not stored there).
  void remove(const Vec<D>& p) {
    auto it = cells_.find(cell_of(p));
    if (it == cells_.end()) throw Error(ErrorCode::NotPresent, "no point stored in that cell");
    Cell& c = it->second;
    if (track_) {
      auto pos = std::find(c.points.begin(), c.points.end(), p);
      if (pos == c.points.end()) throw Error(ErrorCode::NotPresent, "point is not stored in its cell");
      *pos = c.points.back();
      c.points.pop_back();
    }
    if (--c.count == 0) cells_.erase(it);
    --points_;
  }

  /// Inserts `added`, then removes `removed`. Cost is proportional to the
  /// number of changed points.
  void update(std::span<const Vec<D>> added, std::span<const Vec<D>> removed) {
    for (const auto& p : added) insert(p);
    for (const auto& p : removed) remove(p);
  }

  const CellMap& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }
  std::uint64_t point_count() const { return points_; }
  bool empty() const { return cells_.empty(); }

  /// Same lattice and same per-cell counts. Stored point order is ignored.
  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
    if (a.eps_ != b.eps_ || a.origin_cells_ != b.origin_cells_ || a.cells_.size() != b.cells_.size())
      return false;
    for (const auto& [idx, cell] : a.cells_) {
      auto it = b.cells_.find(idx);
      if (it == b.cells_.end() || it->second.count != cell.count) return false;
    }
    return true;
  }

 private:
  double eps_;
  CellIndex<D> origin_cells_;
  bool track_;
  CellMap cells_;
  std::uint64_t points_ = 0;
};

namespace detail {

/// Converts sorted, deduplicated relative corner indices into coordinates.
template <std::size_t D>
std::vector<Vec<D>> corner_points(const OccupancyGrid<D>& grid, std::vector<CellIndex<D>> corners) {
  std::sort(corners.begin(), corners.end());
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
  std::vector<Vec<D>> out;
  out.reserve(corners.size());
  for (const auto& c : corners) {
    Vec<D> p{};
    for (std::size_t i = 0; i < D; ++i) p[i] = grid.coord(i, c[i]);
    out.push_back(p);
  }
  return out;
}

template <std::size_t D>
void push_cell_corners(const CellIndex<D>& cell, std::vector<CellIndex<D>>& out) {
  for (std::size_t mask = 0; mask < (std::size_t{1} << D); ++mask) {
    CellIndex<D> c = cell;
    for (std::size_t i = 0; i < D; ++i)
      if (mask & (std::size_t{1} << i)) ++c[i];
    out.push_back(c);
  }
}

}  // namespace detail

/// All distinct corners of the non-empty cells, sorted by lattice index.
template <std::size_t D>
std::vector<Vec<D>> candidate_corners(const OccupancyGrid<D>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no occupied cells");
  std::vector<CellIndex<D>> corners;
  corners.reserve(grid.cell_count() << D);
  for (const auto& [idx, cell] : grid.cells()) detail::push_cell_corners(idx, corners);
  return detail::corner_points(grid, std::move(corners));
}

/// Per occupied (x, y) column: the 4 bottom corners of its lowest cell and
/// the 4 top corners of its highest cell, deduplicated.
inline std::vector<Vec3> column_extremal_corners(const OccupancyGrid<3>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no occupied cells");
  std::unordered_map<CellIndex<2>, std::pair<std::int64_t, std::int64_t>, CellIndexHash> columns;
  columns.reserve(grid.cell_count());
  for (const auto& [idx, cell] : grid.cells()) {
    const CellIndex<2> col{idx[0], idx[1]};
    auto [it, fresh] = columns.try_emplace(col, idx[2], idx[2]);
    if (!fresh) {
      it->second.first = std::min(it->second.first, idx[2]);
      it->second.second = std::max(it->second.second, idx[2]);
    }
  }
  std::vector<CellIndex<3>> corners;
  corners.reserve(columns.size() * 8);
  for (const auto& [col, range] : columns)
    for (std::int64_t dx = 0; dx <= 1; ++dx)
      for (std::int64_t dy = 0; dy <= 1; ++dy) {
        corners.push_back({col[0] + dx, col[1] + dy, range.first});
        corners.push_back({col[0] + dx, col[1] + dy, range.second + 1});
      }
  return detail::corner_points(grid, std::move(corners));
}

/// Center of every non-empty cell, sorted by cell index.
template <std::size_t D>
std::vector<Vec<D>> cell_centers(const OccupancyGrid<D>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no occupied cells");
  std::vector<CellIndex<D>> idx;
  idx.reserve(grid.cell_count());
  for (const auto& [c, cell] : grid.cells()) idx.push_back(c);
  std::sort(idx.begin(), idx.end());
  std::vector<Vec<D>> out;
  out.reserve(idx.size());
  for (const auto& c : idx) {
    Vec<D> p{};
    for (std::size_t i = 0; i < D; ++i) p[i] = 0.5 * (grid.coord(i, c[i]) + grid.coord(i, c[i], 1));
    out.push_back(p);
  }
  return out;
}

}  // namespace dynpca
