#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semmap/error.hpp"
#include "semmap/plane.hpp"

using namespace semmap;

namespace {

PointCloud map_cloud(std::vector<Point3> pts) { return {std::move(pts), CloudFrame::kMap}; }

// n_inliers on z = 0.7 within +-noise, n_outliers spread through the box
// beneath the slab.
PointCloud slab_with_outliers(int n_inliers, int n_outliers, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(-0.5, 0.5), dz(-noise, noise), z(0.0, 0.65);
  std::vector<Point3> pts;
  for (int i = 0; i < n_inliers; ++i) pts.emplace_back(xy(rng), xy(rng), 0.7 + dz(rng));
  for (int i = 0; i < n_outliers; ++i) pts.emplace_back(xy(rng), xy(rng), z(rng));
  return map_cloud(std::move(pts));
}

double tilt_deg(const Plane& p) { return std::acos(std::min(1.0, std::abs(p.normal.z()))) * 180.0 / std::numbers::pi; }

}  // namespace

TEST(Canonicalize, UnitNormalPointingUp) {
  const Plane p = canonicalize({0, 0, -2}, 1.4);
  EXPECT_DOUBLE_EQ(p.normal.z(), 1.0);
  EXPECT_DOUBLE_EQ(p.offset, -0.7);
  EXPECT_THROW(canonicalize(Eigen::Vector3d::Zero(), 0), Error);
}

TEST(LeastSquares, ExactHorizontalPlane) {
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) pts.emplace_back(0.1 * i, 0.1 * j, 1.0);
  }
  const Plane p = fit_plane_least_squares(pts);
  EXPECT_NEAR(p.normal.z(), 1.0, 1e-12);
  EXPECT_NEAR(p.offset, -1.0, 1e-12);
}

TEST(LeastSquares, AgreesWithVerticalRegressionOnThinSlab) {
  // For small noise the orthogonal and vertical fits coincide to first order.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> xy(-1, 1);
  std::normal_distribution<double> n(0, 0.001);
  std::vector<Point3> pts;
  std::vector<oracle::P3> raw;
  for (int i = 0; i < 500; ++i) {
    const double x = xy(rng), y = xy(rng);
    pts.emplace_back(x, y, 0.5 + 0.05 * x - 0.02 * y + n(rng));
    raw.push_back({pts.back().x(), pts.back().y(), pts.back().z()});
  }
  const Plane p = fit_plane_least_squares(pts);
  const auto ref = oracle::ls_plane_z(raw);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p.normal[k], ref.n[k], 2e-4);
  EXPECT_NEAR(p.offset, ref.d, 2e-4);
}

TEST(Ransac, ExactPlaneAllInliers) {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) pts.emplace_back(0.05 * i, 0.05 * j, 1.0);
  }
  const PlaneFit fit = ransac_plane(map_cloud(pts), {});
  EXPECT_EQ(fit.inliers.size(), pts.size());
  EXPECT_NEAR(fit.plane.normal.z(), 1.0, 1e-12);
  EXPECT_NEAR(fit.plane.offset, -1.0, 1e-12);
}

TEST(Ransac, SlabAmongOutliers) {
  const PointCloud c = slab_with_outliers(700, 300, 0.005, 5);
  RansacParams p;
  p.seed = 1;
  const PlaneFit fit = ransac_plane(c, p);
  EXPECT_LT(tilt_deg(fit.plane), 2.0);
  EXPECT_NEAR(-fit.plane.offset / fit.plane.normal.z(), 0.7, 0.01);
  EXPECT_GE(fit.inliers.size(), 700u);
  for (auto i : fit.inliers) EXPECT_LE(std::abs(fit.plane.signed_distance(c.points[i])), p.inlier_threshold + 1e-3);
}

TEST(Ransac, BitReproducibleForFixedSeed) {
  const PointCloud c = slab_with_outliers(700, 300, 0.005, 9);
  RansacParams p;
  p.seed = 77;
  const PlaneFit a = ransac_plane(c, p), b = ransac_plane(c, p);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.plane.normal, b.plane.normal);
  EXPECT_EQ(a.plane.offset, b.plane.offset);
}

TEST(Ransac, DegenerateInputs) {
  auto code = [](const PointCloud& c) {
    try {
      ransac_plane(c, {});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code(map_cloud({{0, 0, 0}, {1, 0, 0}})), ErrorCode::kDegenerateCloud);
  std::vector<Point3> line;
  for (int i = 0; i < 30; ++i) line.emplace_back(0.1 * i, 0.2 * i, 0.5);
  EXPECT_EQ(code(map_cloud(line)), ErrorCode::kDegenerateCloud);
}

TEST(Ransac, InsufficientConsensus) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point3> pts;
  for (int i = 0; i < 400; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  RansacParams p;
  p.min_inlier_ratio = 0.5;
  try {
    ransac_plane(map_cloud(pts), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientConsensus);
  }
}

TEST(Ransac, NormalGateRejectsWalls) {
  // A vertical wall with more points than the slab wins without the gate.
  std::vector<Point3> pts;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) pts.emplace_back(0.02 * i, 0.0, 0.02 * j);
  }
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) pts.emplace_back(0.02 * i, 0.1 + 0.02 * j, 0.7);
  }
  RansacParams p;
  p.min_inlier_ratio = 0.2;
  EXPECT_GT(tilt_deg(ransac_plane(map_cloud(pts), p).plane), 80.0);
  p.min_normal_z = 0.7;
  EXPECT_LT(tilt_deg(ransac_plane(map_cloud(pts), p).plane), 1.0);
}

TEST(Project, DropsZ) {
  const auto pts = project_inliers_to_map(map_cloud({{1, 2, 0.7}, {-1, 0.5, 0.3}}));
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0], Point2(1, 2));
  EXPECT_EQ(pts[1], Point2(-1, 0.5));
}

TEST(FootprintHull, ContainsEveryInput) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 50; ++t) {
    std::vector<Point2> pts;
    for (int i = 0; i < 60; ++i) pts.emplace_back(u(rng), u(rng));
    const Polygon2 hull = footprint_hull(pts);
    EXPECT_GT(signed_area(hull), 0.0);
    for (const auto& p : pts) EXPECT_LE(distance_to_convex(hull, p), 1e-9);
  }
}

TEST(FootprintHull, CollinearBecomesDisc) {
  std::vector<Point2> pts;
  for (int i = 0; i <= 8; ++i) pts.emplace_back(0.05 * i, 0.0);
  const Polygon2 disc = footprint_hull(pts);
  ASSERT_EQ(disc.size(), 16u);
  for (const auto& v : disc) EXPECT_NEAR((v - Point2(0.2, 0.0)).norm(), 0.2, 1e-9);
  for (const auto& p : pts) EXPECT_LE(distance_to_convex(disc, p), 1e-9);
}

TEST(FootprintHull, SinglePointGetsMinimumDisc) {
  const std::vector<Point2> one = {{1, 1}};
  const Polygon2 disc = footprint_hull(one);
  EXPECT_EQ(disc.size(), 16u);
  EXPECT_TRUE(convex_contains(disc, {1, 1}));
  EXPECT_GT(signed_area(disc), 0.0);
}
