#include "semmap/polygon.hpp"

#include <algorithm>
#include <limits>

#include "semmap/error.hpp"

namespace semmap {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Polygon2 convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double signed_area(std::span<const Point2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

Point2 polygon_centroid(std::span<const Point2> polygon) {
  if (polygon.empty()) throw Error(ErrorCode::kInvalidArgument, "centroid of empty polygon");
  const double area = signed_area(polygon);
  if (std::abs(area) < 1e-12) {
    Point2 mean = Point2::Zero();
    for (const auto& p : polygon) mean += p;
    return mean / static_cast<double>(polygon.size());
  }
  // Shift to the first vertex to keep the products well conditioned.
  const Point2 o = polygon[0];
  Point2 acc = Point2::Zero();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = polygon[i] - o;
    const Point2 b = polygon[(i + 1) % n] - o;
    const double w = a.x() * b.y() - b.x() * a.y();
    acc += (a + b) * w;
  }
  return o + acc / (6.0 * area);
}

Box2 bounding_box(std::span<const Point2> polygon) {
  if (polygon.empty()) throw Error(ErrorCode::kInvalidArgument, "bounding box of empty polygon");
  Box2 box{polygon[0], polygon[0]};
  for (const auto& p : polygon) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

bool convex_contains(std::span<const Point2> polygon, const Point2& p, double tolerance) {
  const std::size_t n = polygon.size();
  if (n == 0) return false;
  if (n < 3) {
    // Segment or single point.
    const Point2& a = polygon[0];
    const Point2& b = polygon[n - 1];
    return distance_to_segment(p, a, b) <= tolerance;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    if (cross(a, b, p) / len < -tolerance) return false;
  }
  return true;
}

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_convex(std::span<const Point2> polygon, const Point2& p) {
  if (polygon.empty()) throw Error(ErrorCode::kInvalidArgument, "distance to empty polygon");
  if (polygon.size() >= 3 && convex_contains(polygon, p, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, distance_to_segment(p, polygon[i], polygon[(i + 1) % n]));
  }
  return best;
}

}  // namespace semmap
