#pragma once

#include <span>
#include <vector>

#include "semmap/geometry.hpp"

namespace semmap {

/// Vertices in map metres. Convex polygons produced by this library are
/// counter-clockwise without repeated closing vertex.
using Polygon2 = std::vector<Point2>;

struct Box2 {
  Point2 min;
  Point2 max;
};

/// Andrew's monotone chain. Returns CCW hull vertices with collinear points
/// dropped; fewer than 3 vertices when the input is degenerate.
Polygon2 convex_hull(std::span<const Point2> points);

/// Signed shoelace area (positive for CCW).
double signed_area(std::span<const Point2> polygon);

/// Area centroid; falls back to the vertex mean for zero-area polygons.
Point2 polygon_centroid(std::span<const Point2> polygon);

Box2 bounding_box(std::span<const Point2> polygon);

/// Point-in-convex-polygon (CCW) with an absolute boundary tolerance.
bool convex_contains(std::span<const Point2> polygon, const Point2& p, double tolerance = 1e-9);

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b);

/// Euclidean distance to a convex polygon; 0 inside.
double distance_to_convex(std::span<const Point2> polygon, const Point2& p);

}  // namespace semmap
