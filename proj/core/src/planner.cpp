#include "semmap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "semmap/error.hpp"

namespace semmap {

namespace {

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

double octile(Cell a, Cell b) {
  const double dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy);
}

// Distance from p to the footprint rectangle of an oriented box.
double distance_to_box(const OrientedBox& box, const Point2& p) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Point2 d = p - box.center.head<2>();
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  const double ex = std::max(std::abs(lx) - box.half_extents.x(), 0.0);
  const double ey = std::max(std::abs(ly) - box.half_extents.y(), 0.0);
  return std::hypot(ex, ey);
}

}  // namespace

void PlanRequest::validate() const {
  if (lethal_threshold <= 0 || lethal_threshold > 255)
    throw Error(ErrorCode::kInvalidArgument, "lethal threshold must lie in (0, 255]");
  if (!(cost_weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "cost weight must be >= 0");
  if (!(robot_radius >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "robot radius must be >= 0");
  if (!(flight_height > 0.0)) throw Error(ErrorCode::kInvalidArgument, "flight height must be positive");
  if (start == goal) throw Error(ErrorCode::kInvalidArgument, "start equals goal");
}

OccupancyGrid inflate_obstacles(const OccupancyGrid& costmap, double radius, int lethal_threshold) {
  const GridGeometry& g = costmap.geometry();
  std::vector<std::uint8_t> out = costmap.values();
  const int reach = static_cast<int>(std::floor(radius / g.resolution + 1e-9));
  const double r2 = (radius / g.resolution) * (radius / g.resolution) + 1e-9;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (costmap.value({x, y}) < lethal_threshold) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const Cell n{x + dx, y + dy};
          if (!g.contains(n) || dx * dx + dy * dy > r2) continue;
          out[g.index(n)] = 255;
        }
      }
    }
  }
  return OccupancyGrid::from_values(g, std::move(out), costmap.params());
}

double inflation_radius(double robot_radius, double resolution) {
  // An obstacle may reach half a cell diagonal past the centre of the cell that records it.
  return robot_radius + resolution * std::sqrt(0.5);
}

Path plan(const OccupancyGrid& costmap, const PlanRequest& request) {
  request.validate();
  const double radius = inflation_radius(request.robot_radius, costmap.geometry().resolution);
  return plan_on_inflated(inflate_obstacles(costmap, radius, request.lethal_threshold), request);
}

Path plan_on_inflated(const OccupancyGrid& grid, const PlanRequest& request) {
  request.validate();
  const GridGeometry& g = grid.geometry();
  const Cell start = g.cell_of(request.start);
  const Cell goal = g.cell_of(request.goal);
  if (!g.contains(start) || !g.contains(goal))
    throw Error(ErrorCode::kInvalidArgument, "start or goal outside the grid");
  auto lethal = [&](Cell c) { return grid.value(c) >= request.lethal_threshold; };
  if (lethal(start) || lethal(goal)) throw Error(ErrorCode::kStartOrGoalLethal, "start or goal cell is lethal");

  const std::size_t n = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n, inf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t s = g.index(start), t = g.index(goal);
  cost[s] = 0.0;
  open.push({octile(start, goal) * g.resolution, s});
  while (!open.empty()) {
    const std::size_t cur = open.top().second;
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == t) break;
    const Cell c = g.cell_at(cur);
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.x + kDx[k], c.y + kDy[k]};
      if (!g.contains(nb) || lethal(nb)) continue;
      const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
      if (diagonal && lethal({c.x + kDx[k], c.y}) && lethal({c.x, c.y + kDy[k]})) continue;
      const std::size_t ni = g.index(nb);
      if (closed[ni]) continue;
      const double step = (diagonal ? std::sqrt(2.0) : 1.0) * g.resolution;
      const double nc = cost[cur] + step * (1.0 + request.cost_weight * cell_probability(grid.value(nb)));
      if (nc < cost[ni]) {
        cost[ni] = nc;
        parent[ni] = static_cast<std::int64_t>(cur);
        open.push({nc + octile(nb, goal) * g.resolution, ni});
      }
    }
  }
  if (!closed[t]) throw Error(ErrorCode::kNoPath, "goal unreachable");

  Path path;
  path.cost = cost[t];
  for (std::int64_t i = static_cast<std::int64_t>(t); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    path.cells.push_back(g.cell_at(static_cast<std::size_t>(i)));
  }
  std::reverse(path.cells.begin(), path.cells.end());
  path.waypoints.reserve(path.cells.size());
  for (Cell c : path.cells) path.waypoints.push_back(g.center(c));
  return path;
}

CollisionReport validate_path(const Path& path, const SceneDescription& scene, double flight_height,
                              double robot_radius, double step, double r_z) {
  if (!(flight_height > 0.0)) throw Error(ErrorCode::kInvalidArgument, "flight height must be positive");
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sampling step must be positive");
  const double z_lo = flight_height - r_z, z_hi = flight_height + r_z;

  struct Candidate {
    OrientedBox box;
    std::optional<int> object_id;
    std::optional<std::size_t> wall_index;
  };
  std::vector<Candidate> boxes;
  for (const auto& obj : scene.objects) {
    for (const auto& b : obj.boxes()) {
      if (b.z_max() >= z_lo && b.z_min() <= z_hi) boxes.push_back({b, obj.id, std::nullopt});
    }
  }
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& b = scene.walls[i];
    if (b.z_max() >= z_lo && b.z_min() <= z_hi) boxes.push_back({b, std::nullopt, i});
  }

  CollisionReport report;
  auto check = [&](const Point2& p, std::size_t segment) {
    for (const auto& c : boxes) {
      if (distance_to_box(c.box, p) < robot_radius || distance_to_box(c.box, p) == 0.0) {
        report.collided = true;
        report.waypoint_index = segment;
        report.object_id = c.object_id;
        report.wall_index = c.wall_index;
        report.where = p;
        return true;
      }
    }
    return false;
  };

  if (path.waypoints.empty()) return report;
  if (check(path.waypoints.front(), 0)) return report;
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    const Point2 a = path.waypoints[i], b = path.waypoints[i + 1];
    const int samples = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int k = 1; k <= samples; ++k) {
      const Point2 p = a + (b - a) * (static_cast<double>(k) / samples);
      if (check(p, i)) return report;
    }
  }
  return report;
}

}  // namespace semmap
