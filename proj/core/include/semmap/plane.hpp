#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semmap/cloud.hpp"
#include "semmap/polygon.hpp"

namespace semmap {

/// n^T p + d = 0 with |n| = 1 and n.z >= 0.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
};

struct RansacParams {
  int iterations = 200;
  double inlier_threshold = 0.01;
  double min_inlier_ratio = 0.4;
  std::uint64_t seed = 0;
  // Hypotheses whose |n.z| falls below this are discarded (0 keeps all).
  double min_normal_z = 0.0;
};

struct PlaneFit {
  Plane plane;
  std::vector<std::size_t> inliers;
};

/// Flips/normalises so that |n| = 1 and n.z >= 0.
Plane canonicalize(const Eigen::Vector3d& normal, double offset);

/// Total least squares: through the centroid, normal along the smallest
/// eigenvector of the scatter matrix. Needs >= 3 points.
Plane fit_plane_least_squares(std::span<const Point3> points);

/// Best 3-point hypothesis by inlier count (|n^T p + d| <= threshold), then a
/// least-squares refit on its inliers. Deterministic for a fixed seed.
/// Throws kDegenerateCloud (< 3 points or all collinear) and
/// kInsufficientConsensus (best inlier ratio below min_inlier_ratio).
PlaneFit ransac_plane(const PointCloud& map_cloud, const RansacParams& params);

/// Drops z: every plane point lands on the z = 0 map plane.
std::vector<Point2> project_inliers_to_map(const PointCloud& inliers);

/// Convex hull (CCW). Inputs whose hull area is below 1e-6 m^2 become a
/// 16-gon around their centroid.
Polygon2 footprint_hull(std::span<const Point2> points);

}  // namespace semmap
