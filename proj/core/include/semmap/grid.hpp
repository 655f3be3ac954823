#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/polygon.hpp"
#include "semmap/scene.hpp"

namespace semmap {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// Cell (0, 0) spans [origin, origin + resolution) on both axes.
struct GridGeometry {
  double resolution = 0.05;
  Point2 origin = Point2::Zero();
  int width = 0;
  int height = 0;

  /// Smallest grid at `resolution` covering the box.
  static GridGeometry covering(const Box2& box, double resolution);

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width + c.x; }
  Cell cell_at(std::size_t index) const { return {static_cast<int>(index % width), static_cast<int>(index / width)}; }
  /// Cell containing the point (may lie outside the grid).
  Cell cell_of(const Point2& p) const;
  Point2 center(Cell c) const;

  bool operator==(const GridGeometry&) const = default;
};

struct LogOddsParams {
  double l_occ = 0.85;
  double l_free = -0.4;
  double l_min = -6.5;
  double l_max = 6.5;
};

/// value / 255, exact at both ends.
double cell_probability(std::uint8_t value);

/// round(255 * sigmoid(l)).
std::uint8_t log_odds_to_value(double log_odds);

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  /// Every cell starts at log-odds 0 (value 128).
  explicit OccupancyGrid(const GridGeometry& geometry, const LogOddsParams& params = {});

  /// Grid holding the given values; log-odds are recovered from them.
  static OccupancyGrid from_values(const GridGeometry& geometry, std::vector<std::uint8_t> values,
                                   const LogOddsParams& params = {});

  const GridGeometry& geometry() const { return geometry_; }
  const LogOddsParams& params() const { return params_; }
  const std::vector<std::uint8_t>& values() const { return values_; }
  std::uint8_t value(Cell c) const { return values_[geometry_.index(c)]; }
  double log_odds(Cell c) const { return log_odds_[geometry_.index(c)]; }

  /// Adds delta in log-odds space, clamps, refreshes the 0-255 value.
  void update(std::size_t index, double delta);

 private:
  GridGeometry geometry_;
  LogOddsParams params_;
  std::vector<double> log_odds_;
  std::vector<std::uint8_t> values_;
};

/// One planar range reading per image column. Bearings are counter-clockwise
/// from the optical axis about the robot's +z.
struct Beam {
  double bearing = 0.0;
  double range = 0.0;  // 0 when the column has no return
  double max_range = 0.0;

  bool hit() const { return range > 0.0; }
};

struct Scan2D {
  std::vector<Beam> beams;
};

/// Minimum planar range sqrt(x^2 + z^2) over rows round(cy) +- band_half_height.
Scan2D depth_to_scan(const DepthImage& depth, const CameraModel& cam, int band_half_height);

/// Cells on the integer line from the sensor cell to the beam end get l_free,
/// the end cell of a hit gets l_occ. Each cell is updated at most once per
/// scan, occupied taking precedence. Throws kPoseOutsideGrid.
void integrate_scan(OccupancyGrid& grid, const RobotPose2D& sensor_pose, const Scan2D& scan);

/// Bresenham cells from a to b inclusive.
std::vector<Cell> trace_line(Cell a, Cell b);

}  // namespace semmap
