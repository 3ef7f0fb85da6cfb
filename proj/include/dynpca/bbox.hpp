#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "dynpca/error.hpp"
#include "dynpca/grid.hpp"
#include "dynpca/linalg.hpp"

namespace dynpca {

/// Projection interval [lo_i, hi_i] of a point set onto each frame axis.
template <std::size_t D>
struct Extents {
  Vec<D> lo{};
  Vec<D> hi{};

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < D; ++i) v *= hi[i] - lo[i];
    return v;
  }

  bool contains(const Extents& other) const {
    for (std::size_t i = 0; i < D; ++i)
      if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
    return true;
  }

  friend bool operator==(const Extents&, const Extents&) = default;
};

template <std::size_t D>
struct OrientedBox {
  Frame<D> frame;
  Extents<D> extents;

  double volume() const { return extents.volume(); }

  /// True when every projection of `p` lies in [lo - slack, hi + slack].
  bool contains(const Vec<D>& p, double slack = 1e-12) const {
    for (std::size_t i = 0; i < D; ++i) {
      const double t = dot(frame.axes[i], p);
      if (t < extents.lo[i] - slack || t > extents.hi[i] + slack) return false;
    }
    return true;
  }

  /// The 2^D corners in world coordinates.
  std::vector<Vec<D>> corners() const {
    std::vector<Vec<D>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << D); ++mask) {
      Vec<D> c{};
      for (std::size_t i = 0; i < D; ++i) {
        const double t = (mask & (std::size_t{1} << i)) ? extents.hi[i] : extents.lo[i];
        c = add(c, scale(frame.axes[i], t));
      }
      out.push_back(c);
    }
    return out;
  }
};

/// Exact extremal projections by a full pass over `points`.
template <std::size_t D>
Extents<D> extreme_scan(std::span<const Vec<D>> points, const Frame<D>& frame) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "no points to scan");
  Extents<D> e;
  e.lo.fill(std::numeric_limits<double>::infinity());
  e.hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    for (std::size_t i = 0; i < D; ++i) {
      const double t = dot(frame.axes[i], p);
      e.lo[i] = std::min(e.lo[i], t);
      e.hi[i] = std::max(e.hi[i], t);
    }
  }
  return e;
}

template <std::size_t D>
Extents<D> extreme_scan(const std::vector<Vec<D>>& points, const Frame<D>& frame) {
  return extreme_scan(std::span<const Vec<D>>(points), frame);
}

enum class GridVariant {
  /// Every corner of every non-empty cell.
  corners,
  /// Top and bottom corners of each vertical (z) column; 3D only.
  columns,
};

/// Conservative extents from grid corners. Both variants return identical
/// extents; `candidates`, when given, receives the number of corners scanned.
template <std::size_t D>
Extents<D> extreme_grid(const OccupancyGrid<D>& grid, const Frame<D>& frame, GridVariant variant,
                        std::size_t* candidates = nullptr) {
  std::vector<Vec<D>> pts;
  if (variant == GridVariant::columns) {
    if constexpr (D == 3) pts = column_extremal_corners(grid);
    else throw Error(ErrorCode::InvalidArgument, "column candidates need a 3D grid");
  } else {
    pts = candidate_corners(grid);
  }
  if (candidates) *candidates = pts.size();
  return extreme_scan(std::span<const Vec<D>>(pts), frame);
}

template <std::size_t D>
Extents<D> expand_extents(Extents<D> e, double delta) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "expansion must be non-negative");
  for (std::size_t i = 0; i < D; ++i) {
    e.lo[i] -= delta;
    e.hi[i] += delta;
  }
  return e;
}

/// Half the diagonal of a grid cell: sqrt(D) eps / 2.
template <std::size_t D>
double half_cell_diagonal(double eps) {
  return std::sqrt(static_cast<double>(D)) * eps / 2.0;
}

/// Cell-center variant: scans one center per non-empty cell and grows the
/// result by half a cell diagonal so it still encloses every point.
template <std::size_t D>
Extents<D> extreme_cell_centers(const OccupancyGrid<D>& grid, const Frame<D>& frame,
                                std::size_t* candidates = nullptr) {
  const auto centers = cell_centers(grid);
  if (candidates) *candidates = centers.size();
  return expand_extents(extreme_scan(std::span<const Vec<D>>(centers), frame), half_cell_diagonal<D>(grid.epsilon()));
}

template <std::size_t D>
struct TightResult {
  Extents<D> extents;
  std::size_t points_examined = 0;
};

/// Exact extents from a point-tracking grid and the coarse corner extents.
///
/// For each axis side only the points of cells that reach into the slab of
/// width sqrt(D) eps / 2 behind the coarse extreme are scanned. If the best
/// point found lies deeper than the slab, cells whose reach exceeds that
/// point are scanned too, so the result always equals extreme_scan over all
/// stored points.
template <std::size_t D>
TightResult<D> refine_tight(const OccupancyGrid<D>& grid, const Frame<D>& frame, const Extents<D>& coarse) {
  if (!grid.tracks_points()) throw Error(ErrorCode::InvalidArgument, "tight refinement needs a point-tracking grid");
  if (grid.empty()) throw Error(ErrorCode::EmptyInput, "grid holds no points");

  using Cell = typename OccupancyGrid<D>::Cell;
  struct Reach {
    double low;
    double high;
    const Cell* cell;
  };
  const double slab = half_cell_diagonal<D>(grid.epsilon());
  constexpr double inf = std::numeric_limits<double>::infinity();

  TightResult<D> out;
  std::vector<Reach> reach;
  reach.reserve(grid.cell_count());
  for (std::size_t a = 0; a < D; ++a) {
    const Vec<D>& w = frame.axes[a];
    reach.clear();
    for (const auto& [idx, cell] : grid.cells()) {
      Vec<D> top{}, bottom{};
      for (std::size_t i = 0; i < D; ++i) {
        const double c0 = grid.coord(i, idx[i]);
        const double c1 = grid.coord(i, idx[i], 1);
        top[i] = w[i] >= 0.0 ? c1 : c0;
        bottom[i] = w[i] >= 0.0 ? c0 : c1;
      }
      reach.push_back({dot(w, bottom), dot(w, top), &cell});
    }

    auto scan = [&](const Cell& cell, double& lo, double& hi) {
      for (const auto& p : cell.points) {
        const double t = dot(w, p);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
      out.points_examined += cell.points.size();
    };

    double best_hi = -inf, unused = inf;
    const double hi_floor = coarse.hi[a] - slab;
    for (const auto& r : reach)
      if (r.high >= hi_floor) scan(*r.cell, unused, best_hi);
    if (best_hi < hi_floor) {
      const double found = best_hi;
      for (const auto& r : reach)
        if (r.high > found && r.high < hi_floor) scan(*r.cell, unused, best_hi);
    }

    double best_lo = inf;
    double ignored = -inf;
    const double lo_ceiling = coarse.lo[a] + slab;
    for (const auto& r : reach)
      if (r.low <= lo_ceiling) scan(*r.cell, best_lo, ignored);
    if (best_lo > lo_ceiling) {
      const double found = best_lo;
      for (const auto& r : reach)
        if (r.low < found && r.low > lo_ceiling) scan(*r.cell, best_lo, ignored);
    }

    out.extents.lo[a] = best_lo;
    out.extents.hi[a] = best_hi;
  }
  return out;
}

/// Principal frame of any summary exposing a `cov` member.
template <typename Summary>
auto frame_of(const Summary& s) {
  return principal_frame(s.cov);
}

/// Box whose axes are the principal directions of `summary` and whose
/// extents come from `source(frame)`, e.g. an exhaustive or grid scan.
template <typename Summary, typename ExtentSource>
auto build_box(const Summary& summary, ExtentSource&& source) {
  const auto frame = frame_of(summary);
  auto extents = source(frame);
  return OrientedBox<std::tuple_size_v<decltype(extents.lo)>>{frame, extents};
}

}  // namespace dynpca
