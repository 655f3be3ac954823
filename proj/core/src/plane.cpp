#include "semmap/plane.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "semmap/error.hpp"

namespace semmap {

namespace {

constexpr double kDegenerateArea = 1e-6;
constexpr int kDiscVertices = 16;
constexpr double kMinDiscRadius = 0.01;

// Scatter about the mean; eigenvalues ascending.
Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> scatter(std::span<const Point3> points, Point3& mean) {
  mean.setZero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Point3 q = p - mean;
    cov += q * q.transpose();
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov);
}

bool collinear(std::span<const Point3> points) {
  Point3 mean;
  const auto eig = scatter(points, mean);
  const Eigen::Vector3d ev = eig.eigenvalues();
  return ev[1] <= 1e-12 * std::max(ev[2], 1e-300) || ev[2] == 0.0;
}

}  // namespace

Plane canonicalize(const Eigen::Vector3d& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw Error(ErrorCode::kInvalidArgument, "plane normal has zero length");
  Eigen::Vector3d n = normal / len;
  double d = offset / len;
  bool flip = n.z() < 0.0;
  if (n.z() == 0.0) flip = n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0);
  if (flip) {
    n = -n;
    d = -d;
  }
  return {n, d};
}

Plane fit_plane_least_squares(std::span<const Point3> points) {
  if (points.size() < 3) throw Error(ErrorCode::kDegenerateCloud, "plane fit needs >= 3 points");
  Point3 mean;
  const auto eig = scatter(points, mean);
  const Eigen::Vector3d n = eig.eigenvectors().col(0);
  return canonicalize(n, -n.dot(mean));
}

PlaneFit ransac_plane(const PointCloud& map_cloud, const RansacParams& params) {
  if (map_cloud.frame != CloudFrame::kMap)
    throw Error(ErrorCode::kInvalidArgument, "ransac_plane expects a map-frame cloud");
  if (params.iterations < 1 || !(params.inlier_threshold > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "ransac needs iterations >= 1 and a positive threshold");
  const auto& pts = map_cloud.points;
  const std::size_t n = pts.size();
  if (n < 3) throw Error(ErrorCode::kDegenerateCloud, "fewer than 3 points");
  if (collinear(pts)) throw Error(ErrorCode::kDegenerateCloud, "all points are collinear");

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::size_t best_count = 0;
  Plane best;
  bool have_best = false;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Eigen::Vector3d normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (normal.norm() < 1e-12) continue;
    const Plane hypothesis = canonicalize(normal, -normal.dot(pts[a]));
    if (std::abs(hypothesis.normal.z()) < params.min_normal_z) continue;

    std::size_t count = 0;
    for (const auto& p : pts) {
      if (std::abs(hypothesis.signed_distance(p)) <= params.inlier_threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = hypothesis;
      have_best = true;
    }
  }

  if (!have_best || static_cast<double>(best_count) < params.min_inlier_ratio * static_cast<double>(n)) {
    throw Error(ErrorCode::kInsufficientConsensus,
                "best plane explains " + std::to_string(best_count) + " of " + std::to_string(n) + " points");
  }

  PlaneFit fit;
  std::vector<Point3> inlier_points;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(best.signed_distance(pts[i])) <= params.inlier_threshold) {
      fit.inliers.push_back(i);
      inlier_points.push_back(pts[i]);
    }
  }
  fit.plane = inlier_points.size() >= 3 && !collinear(inlier_points) ? fit_plane_least_squares(inlier_points) : best;
  return fit;
}

std::vector<Point2> project_inliers_to_map(const PointCloud& inliers) {
  if (inliers.empty()) throw Error(ErrorCode::kEmptyCloud, "nothing to project");
  std::vector<Point2> out;
  out.reserve(inliers.size());
  for (const auto& p : inliers.points) out.emplace_back(p.x(), p.y());
  return out;
}

Polygon2 footprint_hull(std::span<const Point2> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "footprint of no points");
  Polygon2 hull = convex_hull(points);
  if (hull.size() >= 3 && std::abs(signed_area(hull)) >= kDegenerateArea) return hull;

  // Disc fallback centred on the point mean, with a vertex on the direction of
  // the farthest input so collinear inputs stay inside.
  Point2 center = Point2::Zero();
  for (const auto& p : points) center += p;
  center /= static_cast<double>(points.size());

  double diameter = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) diameter = std::max(diameter, (hull[i] - hull[j]).norm());
  }
  double radius = diameter / 2.0;
  Point2 farthest = center;
  for (const auto& p : hull) {
    if ((p - center).norm() > (farthest - center).norm()) farthest = p;
  }
  radius = std::max({radius, (farthest - center).norm(), kMinDiscRadius});
  const Point2 dir = farthest - center;
  const double phase = dir.norm() > 0.0 ? std::atan2(dir.y(), dir.x()) : 0.0;

  Polygon2 disc;
  disc.reserve(kDiscVertices);
  for (int k = 0; k < kDiscVertices; ++k) {
    const double a = phase + 2.0 * std::numbers::pi * k / kDiscVertices;
    disc.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  }
  return disc;
}

}  // namespace semmap
