#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "semmap/grid.hpp"
#include "semmap/scene.hpp"

namespace semmap {

struct PlanRequest {
  Point2 start = Point2::Zero();
  Point2 goal = Point2::Zero();
  int lethal_threshold = 200;  // cells with value >= this are impassable
  double cost_weight = 3.0;
  double robot_radius = 0.25;
  double flight_height = 0.8;

  void validate() const;
};

struct Path {
  std::vector<Point2> waypoints;  // cell centres
  std::vector<Cell> cells;
  double cost = 0.0;
};

/// Every cell whose centre lies within `radius` of a lethal cell centre is
/// raised to 255.
OccupancyGrid inflate_obstacles(const OccupancyGrid& costmap, double radius, int lethal_threshold);

/// robot_radius plus half a cell diagonal.
double inflation_radius(double robot_radius, double resolution);

/// A* over 8-connected cells of the costmap inflated by robot_radius plus half
/// a cell diagonal. Moving into cell c costs
/// step_length * (1 + cost_weight * cell_probability(c)). Diagonal moves
/// between two lethal orthogonal neighbours are not allowed.
/// Throws kInvalidArgument (start/goal off the grid), kStartOrGoalLethal, kNoPath.
Path plan(const OccupancyGrid& costmap, const PlanRequest& request);

/// Same search on a costmap that is already inflated.
Path plan_on_inflated(const OccupancyGrid& inflated, const PlanRequest& request);

struct CollisionReport {
  bool collided = false;
  std::optional<std::size_t> waypoint_index;  // start of the offending segment
  std::optional<int> object_id;
  std::optional<std::size_t> wall_index;
  Point2 where = Point2::Zero();
};

/// Sweeps a disc of robot_radius and vertical half-extent r_z at
/// flight_height along the path, sampling every `step` metres at most, against
/// every true box in the scene. Reports the first contact.
CollisionReport validate_path(const Path& path, const SceneDescription& scene, double flight_height,
                              double robot_radius, double step, double r_z = 0.10);

}  // namespace semmap
