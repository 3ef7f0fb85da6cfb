#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dynpca/grid.hpp"
#include "oracles.hpp"

using namespace dynpca;

namespace {

template <std::size_t D>
std::set<Vec<D>> as_set(const std::vector<Vec<D>>& v) {
  return {v.begin(), v.end()};
}

double max_projection(const std::vector<Vec3>& pts, const Vec3& w) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::max(best, dot(w, p));
  return best;
}

}  // namespace

TEST(CellOf, FloorDivision) {
  EXPECT_EQ(cell_of(Vec3{0.7, 0.2, 0.9}, 0.5, Vec3{}), (CellIndex<3>{1, 0, 1}));
  EXPECT_EQ(cell_of(Vec3{0, 0, 0}, 0.5, Vec3{}), (CellIndex<3>{0, 0, 0}));
  EXPECT_EQ(cell_of(Vec3{1.0, 0, 0}, 0.5, Vec3{}), (CellIndex<3>{2, 0, 0}));
  EXPECT_EQ(cell_of(Vec2{-0.1, -1.0}, 0.5, Vec2{}), (CellIndex<2>{-1, -2}));
  EXPECT_EQ(cell_of(Vec2{1.3, 2.3}, 0.5, Vec2{1.3, 2.3}), (CellIndex<2>{0, 0}));
}

TEST(CellOf, BoundsHoldInFloatingPoint) {
  std::mt19937_64 rng(301);
  for (double eps : {0.1, 0.05, 0.003, 1.0 / 3.0}) {
    for (int k = 0; k < 20000; ++k) {
      const auto p = oracle::uniform_point<3>(rng, -3, 3);
      const auto c = cell_of(p, eps, Vec3{});
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LE(lattice_coord(c[i], eps), p[i]);
        EXPECT_LT(p[i], lattice_coord(c[i] + 1, eps));
      }
    }
    // Exact multiples land in the upper cell.
    for (std::int64_t k = -50; k < 50; ++k) {
      const double x = lattice_coord(k, eps);
      EXPECT_EQ(cell_of(Vec2{x, 0}, eps, Vec2{})[0], k);
    }
  }
}

TEST(Grid, RejectsBadEpsilon) {
  for (double eps : {0.0, -1.0, std::nan(""), std::numeric_limits<double>::infinity()}) {
    try {
      OccupancyGrid<3> g(eps);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST(Grid, InsertRemoveRoundTrip) {
  OccupancyGrid<3> g(0.25);
  g.insert({0.1, 0.1, 0.1});
  const OccupancyGrid<3> before = g;
  g.insert({0.6, 0.2, 0.9});
  g.remove({0.6, 0.2, 0.9});
  EXPECT_TRUE(g == before);
  EXPECT_EQ(g.point_count(), 1u);
}

TEST(Grid, CoincidentPoints) {
  OccupancyGrid<3> g(0.5);
  g.insert({0.2, 0.2, 0.2});
  g.insert({0.2, 0.2, 0.2});
  g.remove({0.2, 0.2, 0.2});
  ASSERT_EQ(g.cell_count(), 1u);
  EXPECT_EQ(g.cells().begin()->second.count, 1u);
}

TEST(Grid, RemoveFromEmpty) {
  OccupancyGrid<3> g(0.5);
  try {
    g.remove({0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPresent);
  }
}

TEST(Grid, TrackingRemoveChecksThePoint) {
  OccupancyGrid<2> g(1.0, {}, true);
  g.insert({0.2, 0.2});
  try {
    g.remove({0.3, 0.3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPresent);
  }
  g.remove({0.2, 0.2});
  EXPECT_TRUE(g.empty());
}

TEST(Grid, UpdateEqualsRebuild) {
  std::mt19937_64 rng(303);
  auto pts = oracle::uniform_cloud<3>(rng, 2000);
  OccupancyGrid<3> dynamic(0.05);
  dynamic.update(pts, {});
  for (int round = 0; round < 20; ++round) {
    const auto added = oracle::uniform_cloud<3>(rng, 50);
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<Vec3> removed(pts.end() - 40, pts.end());
    pts.resize(pts.size() - 40);
    dynamic.update(added, removed);
    pts.insert(pts.end(), added.begin(), added.end());
  }
  OccupancyGrid<3> rebuilt(0.05);
  rebuilt.update(pts, {});
  EXPECT_TRUE(dynamic == rebuilt);
  EXPECT_EQ(dynamic.point_count(), pts.size());
  for (const auto& [idx, cell] : dynamic.cells()) EXPECT_GE(cell.count, 1u);
}

TEST(Grid, Coverage) {
  std::mt19937_64 rng(305);
  const auto pts = oracle::uniform_cloud<3>(rng, 3000, -0.7, 1.9);
  for (double eps : {0.3, 0.07, 0.011}) {
    const auto g = OccupancyGrid<3>::anchored(eps, pts);
    for (const auto& p : pts) {
      const auto c = g.cell_of(p);
      ASSERT_TRUE(g.cells().count(c));
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LE(g.coord(i, c[i]), p[i]);
        EXPECT_LE(p[i], g.coord(i, c[i], 1));
      }
    }
  }
}

TEST(Grid, AnchoredOriginIsMinimumCell) {
  const std::vector<Vec2> pts{{0.33, -0.71}, {1.2, 0.4}};
  const auto g = OccupancyGrid<2>::anchored(0.25, pts);
  EXPECT_EQ(g.origin_cells(), (CellIndex<2>{1, -3}));
  EXPECT_EQ(g.cell_of(Vec2{0.33, -0.71}), (CellIndex<2>{0, 0}));
  EXPECT_EQ(g.origin(), (Vec2{0.25, -0.75}));
}

TEST(Corners, SinglePoint) {
  OccupancyGrid<3> g(1.0);
  g.insert({0.25, 0.25, 0.25});
  const auto c = candidate_corners(g);
  EXPECT_EQ(c.size(), 8u);
  std::set<Vec3> want;
  for (int m = 0; m < 8; ++m) want.insert({double(m & 1), double((m >> 1) & 1), double((m >> 2) & 1)});
  EXPECT_EQ(as_set(c), want);
}

TEST(Corners, TwoPointsSameCell) {
  OccupancyGrid<3> g(1.0);
  g.insert({0.25, 0.25, 0.25});
  g.insert({0.75, 0.5, 0.1});
  EXPECT_EQ(candidate_corners(g).size(), 8u);
}

TEST(Corners, FaceAdjacentCells) {
  OccupancyGrid<3> g(1.0);
  g.insert({0.5, 0.5, 0.5});
  g.insert({1.5, 0.5, 0.5});
  const auto c = candidate_corners(g);
  EXPECT_EQ(c.size(), 12u);
  // Hand enumeration: x in {0,1,2}, y in {0,1}, z in {0,1}.
  std::set<Vec3> want;
  for (int x = 0; x <= 2; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) want.insert({double(x), double(y), double(z)});
  EXPECT_EQ(as_set(c), want);
}

TEST(Corners, EmptyGrid) {
  try {
    candidate_corners(OccupancyGrid<3>(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  try {
    column_extremal_corners(OccupancyGrid<3>(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
}

TEST(Columns, GapsInColumn) {
  OccupancyGrid<3> g(1.0);
  for (double z : {0.5, 2.5, 5.5}) g.insert({0.5, 0.5, z});
  const auto c = column_extremal_corners(g);
  std::set<Vec3> want;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y) {
      want.insert({double(x), double(y), 0.0});
      want.insert({double(x), double(y), 6.0});
    }
  EXPECT_EQ(as_set(c), want);
  EXPECT_EQ(c.size(), 8u);
}

TEST(Columns, SingleCell) {
  OccupancyGrid<3> g(1.0);
  g.insert({0.5, 0.5, 0.5});
  EXPECT_EQ(as_set(column_extremal_corners(g)), as_set(candidate_corners(g)));
}

TEST(Columns, ProjectionEquivalence) {
  std::mt19937_64 rng(307);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = oracle::anisotropic_cloud<3>(rng, 3000);
    const auto g = OccupancyGrid<3>::anchored(0.4 + 0.3 * trial, pts);
    const auto all = candidate_corners(g);
    const auto cols = column_extremal_corners(g);
    EXPECT_LE(cols.size(), all.size());
    // Column corners are a subset of the candidate corners.
    const auto all_set = as_set(all);
    for (const auto& c : cols) EXPECT_TRUE(all_set.count(c));
    for (int k = 0; k < 1000; ++k) {
      const auto w = oracle::sphere_point(rng);
      EXPECT_EQ(max_projection(cols, w), max_projection(all, w));
    }
  }
}

TEST(Columns, CandidateRatioShrinksWithEpsilon) {
  std::vector<double> ratios;
  const std::vector<double> eps_list{0.1, 0.05, 0.025};
  for (double eps : eps_list) {
    // One point at the center of every cell of the unit cube.
    const auto n = static_cast<int>(std::lround(1.0 / eps));
    OccupancyGrid<3> g(eps);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) g.insert({(i + 0.5) * eps, (j + 0.5) * eps, (k + 0.5) * eps});
    const double ratio =
        static_cast<double>(column_extremal_corners(g).size()) / static_cast<double>(candidate_corners(g).size());
    ratios.push_back(ratio);
    // Exact counts for a full n^3 block: 2 (n+1)^2 versus (n+1)^3.
    EXPECT_NEAR(ratio, 2.0 / (n + 1), 1e-12);
  }
  EXPECT_NEAR(ratios[1] / ratios[0], 0.5, 0.05);
  EXPECT_NEAR(ratios[2] / ratios[1], 0.5, 0.05);
}

TEST(CellCenters, OnePerCell) {
  OccupancyGrid<2> g(0.5);
  g.insert({0.1, 0.1});
  g.insert({0.2, 0.3});
  g.insert({0.9, 0.1});
  EXPECT_EQ(cell_centers(g), (std::vector<Vec2>{{0.25, 0.25}, {0.75, 0.25}}));
}

TEST(Grid, HigherDimension) {
  std::mt19937_64 rng(309);
  const auto pts = oracle::uniform_cloud<8>(rng, 200);
  const auto g = OccupancyGrid<8>::anchored(0.5, pts);
  EXPECT_EQ(g.point_count(), 200u);
  EXPECT_LE(candidate_corners(g).size(), g.cell_count() * 256);
}
