#include <gtest/gtest.h>

#include <random>

#include "dynpca/bbox.hpp"
#include "dynpca/moments.hpp"
#include "oracles.hpp"

using namespace dynpca;

namespace {

template <std::size_t D>
Extents<D> brute_extents(const std::vector<Vec<D>>& pts, const Frame<D>& f) {
  Extents<D> e;
  for (std::size_t i = 0; i < D; ++i) {
    e.lo[i] = std::numeric_limits<double>::infinity();
    e.hi[i] = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
      double t = 0.0;
      for (std::size_t k = 0; k < D; ++k) t += f.axes[i][k] * p[k];
      e.lo[i] = std::min(e.lo[i], t);
      e.hi[i] = std::max(e.hi[i], t);
    }
  }
  return e;
}

template <std::size_t D>
Frame<D> random_frame(std::mt19937_64& rng) {
  Frame<D> f;
  f.axes = oracle::random_rotation<D>(rng);
  return f;
}

}  // namespace

TEST(Scan, UnitSquareIdentity) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto e = extreme_scan(sq, Frame<2>::identity());
  EXPECT_EQ(e.lo, (Vec2{0, 0}));
  EXPECT_EQ(e.hi, (Vec2{1, 1}));
}

TEST(Scan, DiamondFromItsCovariance) {
  const std::vector<Vec2> pts{{2, 0}, {-2, 0}, {0, 1}, {0, -1}};
  const auto s = summarize(pts);
  EXPECT_NEAR(s.cov(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(s.cov(1, 1), 0.5, 1e-15);
  const auto box = build_box(s, [&](const Frame<2>& f) { return extreme_scan(pts, f); });
  EXPECT_EQ(box.frame.axes[0], (Vec2{1, 0}));
  EXPECT_EQ(box.extents.lo, (Vec2{-2, -1}));
  EXPECT_EQ(box.extents.hi, (Vec2{2, 1}));
  EXPECT_EQ(box.volume(), 8.0);
}

TEST(Scan, SinglePoint) {
  const auto e = extreme_scan(std::vector<Vec3>{{1, 2, 3}}, Frame<3>::identity());
  EXPECT_EQ(e.lo, e.hi);
  EXPECT_EQ(e.volume(), 0.0);
}

TEST(Scan, EmptyInput) {
  try {
    extreme_scan(std::vector<Vec3>{}, Frame<3>::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Scan, MatchesBruteForce) {
  std::mt19937_64 rng(401);
  for (int t = 0; t < 50; ++t) {
    const auto pts = oracle::uniform_cloud<3>(rng, 500);
    const auto f = random_frame<3>(rng);
    EXPECT_EQ(extreme_scan(pts, f), brute_extents(pts, f));
  }
}

TEST(GridExtents, CellCenterPointsInflateToCells) {
  OccupancyGrid<2> g(1.0);
  const std::vector<Vec2> pts{{0.5, 0.5}, {1.5, 0.5}, {1.5, 2.5}};
  for (const auto& p : pts) g.insert(p);
  const auto e = extreme_grid(g, Frame<2>::identity(), GridVariant::corners);
  EXPECT_EQ(e.lo, (Vec2{0, 0}));
  EXPECT_EQ(e.hi, (Vec2{2, 3}));
  EXPECT_TRUE(e.contains(extreme_scan(pts, Frame<2>::identity())));
}

TEST(GridExtents, LargeEpsilonSingleCell) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto g = OccupancyGrid<2>::anchored(4.0, sq);
  EXPECT_EQ(g.cell_count(), 1u);
  std::size_t cand = 0;
  const auto e = extreme_grid(g, Frame<2>::identity(), GridVariant::corners, &cand);
  EXPECT_EQ(cand, 4u);
  EXPECT_EQ(e.lo, (Vec2{0, 0}));
  EXPECT_EQ(e.hi, (Vec2{4, 4}));
}

TEST(GridExtents, ColumnsNeed3D) {
  OccupancyGrid<2> g(1.0);
  g.insert({0, 0});
  try {
    extreme_grid(g, Frame<2>::identity(), GridVariant::columns);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(GridExtents, VariantsEqualAndConservative) {
  std::mt19937_64 rng(403);
  for (int t = 0; t < 40; ++t) {
    const auto pts = oracle::anisotropic_cloud<3>(rng, 1000);
    const auto f = principal_frame(summarize(pts).cov);
    const auto g = OccupancyGrid<3>::anchored(std::pow(2.0, -(t % 6)), pts);
    std::size_t n_corners = 0, n_columns = 0;
    const auto agp = extreme_grid(g, f, GridVariant::corners, &n_corners);
    const auto egp = extreme_grid(g, f, GridVariant::columns, &n_columns);
    const auto ap = extreme_scan(pts, f);
    EXPECT_EQ(agp, egp);
    EXPECT_LE(n_columns, n_corners);
    EXPECT_TRUE(agp.contains(ap));
    EXPECT_GE(agp.volume(), ap.volume());
  }
}

TEST(GridExtents, DyadicMonotonicity) {
  std::mt19937_64 rng(405);
  for (int t = 0; t < 40; ++t) {
    const auto pts = oracle::anisotropic_cloud<3>(rng, 800);
    const auto f = random_frame<3>(rng);
    const double eps = 0.05 * (1 + t % 4);
    Extents<3> prev = extreme_scan(pts, f);
    for (double e : {eps, 2 * eps, 4 * eps}) {
      const auto ext = extreme_grid(OccupancyGrid<3>::anchored(e, pts), f, GridVariant::corners);
      EXPECT_TRUE(ext.contains(prev)) << "eps " << e;
      prev = ext;
    }
  }
}

TEST(Expand, Basics) {
  const Extents<3> unit{{0, 0, 0}, {1, 1, 1}};
  EXPECT_EQ(expand_extents(unit, 0.0), unit);
  const double d = std::sqrt(3.0) * 0.1 / 2;
  const auto e = expand_extents(unit, d);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(e.hi[i] - e.lo[i], 1.0 + std::sqrt(3.0) * 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(half_cell_diagonal<3>(0.1), d);
  try {
    expand_extents(unit, -1.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::InvalidArgument);
  }
}

TEST(CellCenters, ExpandedBoxContainsAllPoints) {
  std::mt19937_64 rng(407);
  for (int t = 0; t < 1000; ++t) {
    const auto pts = oracle::uniform_cloud<3>(rng, 20 + rng() % 60, -1, 1);
    const auto f = random_frame<3>(rng);
    const double eps = 0.02 + 0.5 * std::uniform_real_distribution<double>()(rng);
    const auto g = OccupancyGrid<3>::anchored(eps, pts);
    const OrientedBox<3> box{f, extreme_cell_centers(g, f)};
    for (const auto& p : pts) ASSERT_TRUE(box.contains(p)) << "trial " << t;
  }
}

TEST(Tight, EqualsScanExactly) {
  std::mt19937_64 rng(409);
  for (int t = 0; t < 60; ++t) {
    const auto pts = t % 2 ? oracle::anisotropic_cloud<3>(rng, 2000) : oracle::uniform_cloud<3>(rng, 2000);
    const auto f = t % 3 ? principal_frame(summarize(pts).cov) : random_frame<3>(rng);
    const auto g = OccupancyGrid<3>::anchored(std::pow(2.0, -(t % 7)), pts, true);
    const auto coarse = extreme_grid(g, f, GridVariant::corners);
    const auto tight = refine_tight(g, f, coarse);
    EXPECT_EQ(tight.extents, extreme_scan(pts, f));
  }
}

TEST(Tight, TwoDimensional) {
  std::mt19937_64 rng(411);
  for (int t = 0; t < 30; ++t) {
    const auto pts = oracle::anisotropic_cloud<2>(rng, 500);
    const auto f = random_frame<2>(rng);
    const auto g = OccupancyGrid<2>::anchored(0.3, pts, true);
    EXPECT_EQ(refine_tight(g, f, extreme_grid(g, f, GridVariant::corners)).extents, extreme_scan(pts, f));
  }
}

TEST(Tight, OutlierExaminesFewPoints) {
  std::mt19937_64 rng(413);
  auto pts = oracle::uniform_cloud<3>(rng, 20000, 0, 1);
  pts.push_back({5, 5, 5});
  const auto f = Frame<3>::identity();
  const auto g = OccupancyGrid<3>::anchored(0.05, pts, true);
  const auto tight = refine_tight(g, f, extreme_grid(g, f, GridVariant::corners));
  EXPECT_EQ(tight.extents, extreme_scan(pts, f));
  EXPECT_EQ(tight.extents.hi, (Vec3{5, 5, 5}));
  EXPECT_LT(tight.points_examined, pts.size() / 4);
}

TEST(Tight, HugeEpsilonDegeneratesToFullScan) {
  std::mt19937_64 rng(415);
  const auto pts = oracle::uniform_cloud<3>(rng, 1000, 0, 1);
  const auto f = random_frame<3>(rng);
  const auto g = OccupancyGrid<3>::anchored(diameter<3>(pts), pts, true);
  const auto tight = refine_tight(g, f, extreme_grid(g, f, GridVariant::corners));
  EXPECT_EQ(tight.extents, extreme_scan(pts, f));
  EXPECT_GE(tight.points_examined, pts.size());
}

TEST(Tight, NeedsTrackingGrid) {
  OccupancyGrid<3> g(1.0);
  g.insert({0, 0, 0});
  try {
    refine_tight(g, Frame<3>::identity(), Extents<3>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Tight, FollowsDynamicUpdates) {
  std::mt19937_64 rng(417);
  auto pts = oracle::anisotropic_cloud<3>(rng, 3000);
  auto g = OccupancyGrid<3>::anchored(0.2, pts, true);
  for (int round = 0; round < 10; ++round) {
    const auto added = oracle::uniform_cloud<3>(rng, 30, -6, 6);
    std::vector<Vec3> removed(pts.begin(), pts.begin() + 30);
    pts.erase(pts.begin(), pts.begin() + 30);
    g.update(added, removed);
    pts.insert(pts.end(), added.begin(), added.end());
    const auto f = principal_frame(summarize(pts).cov);
    EXPECT_EQ(refine_tight(g, f, extreme_grid(g, f, GridVariant::columns)).extents, extreme_scan(pts, f));
  }
}

TEST(Box, AxisAlignedSquareCloud) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) pts.push_back({i * 0.1, j * 0.1});
  const auto s = summarize(pts);
  const auto box = build_box(s, [&](const Frame<2>& f) { return extreme_scan(pts, f); });
  EXPECT_NEAR(box.volume(), 1.0, 1e-12);
}

TEST(Box, RotatedRectangleGrid) {
  std::mt19937_64 rng(419);
  for (int t = 0; t < 20; ++t) {
    const auto r = oracle::random_rotation<3>(rng);
    const auto shift = oracle::uniform_point<3>(rng, -3, 3);
    const double a = 3.0, b = 2.0, c = 1.0;
    std::vector<Vec3> pts;
    for (int i = 0; i <= 12; ++i)
      for (int j = 0; j <= 8; ++j)
        for (int k = 0; k <= 4; ++k) pts.push_back(add(mat_vec(r, Vec3{a * i / 12, b * j / 8, c * k / 4}), shift));
    const auto box = build_box(summarize(pts), [&](const Frame<3>& f) { return extreme_scan(pts, f); });
    EXPECT_NEAR(box.volume(), a * b * c, 1e-9);
    for (const auto& p : pts) EXPECT_TRUE(box.contains(p));
  }
}

TEST(Box, MergedTwoObjectSummary) {
  std::mt19937_64 rng(421);
  auto first = oracle::anisotropic_cloud<3>(rng, 400);
  auto second = oracle::anisotropic_cloud<3>(rng, 600);
  for (auto& p : second) p = add(p, Vec3{10, 3, -2});
  const auto merged = apply_add(summarize(first), summarize(second));
  std::vector<Vec3> both = first;
  both.insert(both.end(), second.begin(), second.end());
  const auto box = build_box(merged, [&](const Frame<3>& f) { return extreme_scan(both, f); });
  for (const auto& p : both) EXPECT_TRUE(box.contains(p));
  EXPECT_EQ(box.frame, principal_frame(merged.cov));
}

TEST(Box, ContinuousSummaryWorksToo) {
  struct Fake {
    SymMatrix<2> cov = SymMatrix<2>::diagonal({1.0, 3.0});
  };
  const std::vector<Vec2> pts{{0, 0}, {1, 2}};
  const auto box = build_box(Fake{}, [&](const Frame<2>& f) { return extreme_scan(pts, f); });
  EXPECT_EQ(box.frame.axes[0], (Vec2{0, 1}));
}

TEST(Box, VolumeInvariantUnderRigidMotion) {
  std::mt19937_64 rng(423);
  for (int t = 0; t < 30; ++t) {
    const auto pts = oracle::anisotropic_cloud<3>(rng, 500);
    const auto r = oracle::random_rotation<3>(rng);
    const auto shift = oracle::uniform_point<3>(rng, -10, 10);
    std::vector<Vec3> moved;
    for (const auto& p : pts) moved.push_back(add(mat_vec(r, p), shift));
    const auto a = build_box(summarize(pts), [&](const Frame<3>& f) { return extreme_scan(pts, f); });
    const auto b = build_box(summarize(moved), [&](const Frame<3>& f) { return extreme_scan(moved, f); });
    EXPECT_NEAR(a.volume(), b.volume(), 1e-9 * a.volume());
  }
}

TEST(Box, CornersRoundTrip) {
  std::mt19937_64 rng(425);
  const auto f = random_frame<3>(rng);
  const OrientedBox<3> box{f, {{-1, 0, 2}, {1, 3, 2.5}}};
  const auto corners = box.corners();
  ASSERT_EQ(corners.size(), 8u);
  const auto e = extreme_scan(corners, f);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(e.lo[i], box.extents.lo[i], 1e-12);
    EXPECT_NEAR(e.hi[i], box.extents.hi[i], 1e-12);
  }
}

TEST(Box, HigherDimensionContainment) {
  std::mt19937_64 rng(427);
  const auto pts = oracle::anisotropic_cloud<8>(rng, 400);
  const auto box = build_box(summarize(pts), [&](const Frame<8>& f) { return extreme_scan(pts, f); });
  for (const auto& p : pts) EXPECT_TRUE(box.contains(p));
}
