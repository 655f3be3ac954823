#include "semmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semmap/error.hpp"

namespace semmap {

GridGeometry GridGeometry::covering(const Box2& box, double resolution) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be positive");
  GridGeometry g;
  g.resolution = resolution;
  g.origin = box.min;
  g.width = std::max(1, static_cast<int>(std::ceil((box.max.x() - box.min.x()) / resolution - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil((box.max.y() - box.min.y()) / resolution - 1e-9)));
  return g;
}

Cell GridGeometry::cell_of(const Point2& p) const {
  return {static_cast<int>(std::floor((p.x() - origin.x()) / resolution)),
          static_cast<int>(std::floor((p.y() - origin.y()) / resolution))};
}

Point2 GridGeometry::center(Cell c) const {
  return {origin.x() + (c.x + 0.5) * resolution, origin.y() + (c.y + 0.5) * resolution};
}

double cell_probability(std::uint8_t value) { return static_cast<double>(value) / 255.0; }

std::uint8_t log_odds_to_value(double log_odds) {
  const double p = 1.0 / (1.0 + std::exp(-log_odds));
  return static_cast<std::uint8_t>(std::lround(255.0 * p));
}

OccupancyGrid::OccupancyGrid(const GridGeometry& geometry, const LogOddsParams& params)
    : geometry_(geometry),
      params_(params),
      log_odds_(geometry.size(), 0.0),
      values_(geometry.size(), log_odds_to_value(0.0)) {
  if (geometry.width <= 0 || geometry.height <= 0) throw Error(ErrorCode::kInvalidArgument, "empty grid");
  if (!(params.l_min < 0.0 && params.l_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bad log-odds clamp");
}

OccupancyGrid OccupancyGrid::from_values(const GridGeometry& geometry, std::vector<std::uint8_t> values,
                                         const LogOddsParams& params) {
  if (values.size() != geometry.size()) throw Error(ErrorCode::kGeometryMismatch, "value count != grid size");
  OccupancyGrid grid(geometry, params);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = cell_probability(values[i]);
    double l = p <= 0.0 ? params.l_min : p >= 1.0 ? params.l_max : std::log(p / (1.0 - p));
    grid.log_odds_[i] = std::clamp(l, params.l_min, params.l_max);
  }
  grid.values_ = std::move(values);
  return grid;
}

void OccupancyGrid::update(std::size_t index, double delta) {
  double& l = log_odds_[index];
  l = std::clamp(l + delta, params_.l_min, params_.l_max);
  values_[index] = log_odds_to_value(l);
}

Scan2D depth_to_scan(const DepthImage& depth, const CameraModel& cam, int band_half_height) {
  if (depth.width != cam.width || depth.height != cam.height)
    throw Error(ErrorCode::kInvalidArgument, "depth image does not match camera");
  const int center_row = std::clamp(static_cast<int>(std::lround(cam.cy)), 0, cam.height - 1);
  if (band_half_height < 0 || center_row - band_half_height < 0 || center_row + band_half_height >= cam.height)
    throw Error(ErrorCode::kInvalidArgument, "scan band outside the image");

  Scan2D scan;
  scan.beams.reserve(cam.width);
  for (int u = 0; u < cam.width; ++u) {
    const double slope = (u - cam.cx) / cam.fx;
    Beam beam;
    // Camera +x is the robot's -y, hence the sign.
    beam.bearing = std::atan2(-(u - cam.cx), cam.fx);
    beam.max_range = cam.depth_max * std::sqrt(1.0 + slope * slope);
    double best = std::numeric_limits<double>::infinity();
    for (int v = center_row - band_half_height; v <= center_row + band_half_height; ++v) {
      const double d = depth.at(u, v);
      if (d == DepthImage::kNoReturn) continue;
      const double x = slope * d;
      best = std::min(best, std::hypot(x, d));
    }
    if (std::isfinite(best)) beam.range = best;
    scan.beams.push_back(beam);
  }
  return scan;
}

std::vector<Cell> trace_line(Cell a, Cell b) {
  std::vector<Cell> out;
  int x = a.x, y = a.y;
  const int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back({x, y});
    if (x == b.x && y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return out;
}

void integrate_scan(OccupancyGrid& grid, const RobotPose2D& sensor_pose, const Scan2D& scan) {
  const GridGeometry& g = grid.geometry();
  const Point2 origin(sensor_pose.x, sensor_pose.y);
  const Cell start = g.cell_of(origin);
  if (!g.contains(start)) throw Error(ErrorCode::kPoseOutsideGrid, "sensor pose lies outside the grid");

  enum : std::uint8_t { kNone = 0, kFree = 1, kOccupied = 2 };
  std::vector<std::uint8_t> marks(g.size(), kNone);
  std::vector<std::size_t> touched;

  auto mark = [&](Cell c, std::uint8_t kind) {
    const std::size_t i = g.index(c);
    if (marks[i] == kNone) touched.push_back(i);
    marks[i] = std::max(marks[i], kind);
  };

  for (const Beam& beam : scan.beams) {
    const double range = beam.hit() ? beam.range : beam.max_range;
    if (!(range > 0.0)) continue;
    const double angle = sensor_pose.theta + beam.bearing;
    const Point2 end = origin + range * Point2(std::cos(angle), std::sin(angle));
    const Cell end_cell = g.cell_of(end);
    const auto cells = trace_line(start, end_cell);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!g.contains(cells[k])) break;
      const bool is_end = k + 1 == cells.size();
      mark(cells[k], is_end && beam.hit() ? kOccupied : kFree);
    }
  }

  const LogOddsParams& p = grid.params();
  for (std::size_t i : touched) grid.update(i, marks[i] == kOccupied ? p.l_occ : p.l_free);
}

}  // namespace semmap
