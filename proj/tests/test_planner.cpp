#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semmap/error.hpp"
#include "semmap/planner.hpp"

using namespace semmap;

namespace {

OccupancyGrid grid_of(int w, int h, double res, std::vector<std::uint8_t> cells) {
  GridGeometry g;
  g.resolution = res;
  g.width = w;
  g.height = h;
  return OccupancyGrid::from_values(g, std::move(cells));
}

PlanRequest request(const GridGeometry& g, Cell s, Cell t) {
  PlanRequest r;
  r.start = g.center(s);
  r.goal = g.center(t);
  return r;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

SceneDescription slab_scene(double z_lo, double z_hi) {
  SceneDescription s;
  s.bounds = {{0, 0}, {4, 4}};
  OrientedBox b;
  b.center = {2.0, 2.0, (z_lo + z_hi) / 2};
  b.half_extents = {0.5, 0.5, (z_hi - z_lo) / 2};
  s.walls.push_back(b);
  return s;
}

Path straight(Point2 a, Point2 b) {
  Path p;
  p.waypoints = {a, b};
  return p;
}

}  // namespace

TEST(Plan, StraightRowCost) {
  const OccupancyGrid free = grid_of(20, 5, 0.1, std::vector<std::uint8_t>(100, 0));
  const Path p = plan_on_inflated(free, request(free.geometry(), {1, 2}, {15, 2}));
  EXPECT_NEAR(p.cost, 1.4, 1e-9);
  EXPECT_EQ(p.cells.size(), 15u);
  for (const auto& c : p.cells) EXPECT_EQ(c.y, 2);

  const OccupancyGrid grey = grid_of(20, 5, 0.1, std::vector<std::uint8_t>(100, 51));
  EXPECT_NEAR(plan_on_inflated(grey, request(grey.geometry(), {1, 2}, {15, 2})).cost, 1.4 * 1.6, 1e-9);
}

TEST(Plan, StartEqualsGoalRejected) {
  const OccupancyGrid free = grid_of(5, 5, 0.1, std::vector<std::uint8_t>(25, 0));
  EXPECT_EQ(code_of([&] { plan_on_inflated(free, request(free.geometry(), {2, 2}, {2, 2})); }),
            ErrorCode::kInvalidArgument);
}

TEST(Plan, WallWithGapMatchesDijkstra) {
  const int w = 30, h = 20;
  std::vector<std::uint8_t> cells(w * h, 0);
  for (int y = 0; y < h; ++y) {
    if (y < 8 || y > 10) cells[y * w + 15] = 255;
  }
  const OccupancyGrid g = grid_of(w, h, 0.05, cells);
  const Path p = plan_on_inflated(g, request(g.geometry(), {2, 2}, {27, 17}));
  EXPECT_NEAR(p.cost, oracle::dijkstra(cells, w, h, 0.05, 2, 2, 27, 17, 200, 3.0), 1e-9);
  bool through_gap = false;
  for (const auto& c : p.cells) {
    EXPECT_LT(g.value(c), 200);
    through_gap |= c.x == 15;
  }
  EXPECT_TRUE(through_gap);
}

TEST(Plan, NoCornerCutting) {
  // Only a diagonal squeeze between two lethal cells connects the halves.
  const int w = 4, h = 4;
  std::vector<std::uint8_t> cells(w * h, 0);
  for (int i = 0; i < 4; ++i) cells[1 * w + i] = 255;
  cells[1 * w + 2] = 0;    // the only opening in row 1
  cells[0 * w + 2] = 255;  // so (2, 1) is reachable from (1, 0) only diagonally
  const OccupancyGrid g = grid_of(w, h, 1.0, cells);
  EXPECT_EQ(code_of([&] { plan_on_inflated(g, request(g.geometry(), {0, 0}, {0, 3})); }), ErrorCode::kNoPath);
}

TEST(Plan, RandomInstancesMatchDijkstra) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 100);
  std::uniform_int_distribution<int> val(0, 255);
  std::bernoulli_distribution wall(0.25);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int w = dim(rng), h = dim(rng);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(w) * h);
    for (auto& c : cells) c = wall(rng) ? 255 : static_cast<std::uint8_t>(val(rng) % 200);
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    const Cell s{xs(rng), ys(rng)}, t{xs(rng), ys(rng)};
    cells[s.y * w + s.x] = 0;
    cells[t.y * w + t.x] = 0;
    const OccupancyGrid g = grid_of(w, h, 0.05, cells);
    const double ref = oracle::dijkstra(cells, w, h, 0.05, s.x, s.y, t.x, t.y, 200, 3.0);
    if (std::isinf(ref)) {
      EXPECT_EQ(code_of([&] { plan_on_inflated(g, request(g.geometry(), s, t)); }), ErrorCode::kNoPath);
      continue;
    }
    const Path p = plan_on_inflated(g, request(g.geometry(), s, t));
    EXPECT_NEAR(p.cost, ref, 1e-9 * std::max(1.0, ref)) << "trial " << trial;
    EXPECT_EQ(p.cells.front(), s);
    EXPECT_EQ(p.cells.back(), t);
    ++solved;
  }
  EXPECT_GT(solved, 20);
}

TEST(Plan, LethalGoalAndOffGrid) {
  std::vector<std::uint8_t> cells(100, 0);
  cells[55] = 255;
  const OccupancyGrid g = grid_of(10, 10, 0.1, cells);
  EXPECT_EQ(code_of([&] { plan_on_inflated(g, request(g.geometry(), {0, 0}, {5, 5})); }),
            ErrorCode::kStartOrGoalLethal);
  PlanRequest r = request(g.geometry(), {0, 0}, {9, 9});
  r.goal = {5.0, 5.0};
  EXPECT_EQ(code_of([&] { plan_on_inflated(g, r); }), ErrorCode::kInvalidArgument);
}

TEST(Inflate, RadiusAroundLethalCells) {
  std::vector<std::uint8_t> cells(21 * 21, 0);
  cells[10 * 21 + 10] = 255;
  const OccupancyGrid g = grid_of(21, 21, 0.1, cells);
  const OccupancyGrid inf = inflate_obstacles(g, 0.25, 200);
  for (int y = 0; y < 21; ++y) {
    for (int x = 0; x < 21; ++x) {
      const double d = 0.1 * std::hypot(x - 10, y - 10);
      EXPECT_EQ(inf.value({x, y}) == 255, d <= 0.25 + 1e-12) << x << "," << y;
    }
  }
  EXPECT_NEAR(inflation_radius(0.25, 0.1), 0.25 + 0.1 * std::sqrt(0.5), 1e-15);
}

TEST(Plan, KeepsClearanceFromObstacles) {
  std::vector<std::uint8_t> cells(40 * 40, 0);
  for (int y = 0; y < 30; ++y) cells[y * 40 + 20] = 255;
  const OccupancyGrid g = grid_of(40, 40, 0.05, cells);
  PlanRequest r = request(g.geometry(), {5, 5}, {35, 5});
  r.robot_radius = 0.15;
  const Path p = plan(g, r);
  const double need = 0.15;
  for (const auto& c : p.cells) {
    for (int y = 0; y < 30; ++y) {
      EXPECT_GT(0.05 * std::hypot(c.x - 20, c.y - y), need) << c.x << "," << c.y;
    }
  }
}

TEST(ValidatePath, ThinSlabAtHeight) {
  const SceneDescription s = slab_scene(0.68, 0.70);
  const Path p = straight({0.5, 2.0}, {3.5, 2.0});
  const CollisionReport hit = validate_path(p, s, 0.69, 0.25, 0.025);
  EXPECT_TRUE(hit.collided);
  ASSERT_TRUE(hit.wall_index.has_value());
  EXPECT_EQ(*hit.wall_index, 0u);
  EXPECT_EQ(*hit.waypoint_index, 0u);
  EXPECT_NEAR(hit.where.x(), 1.25, 0.03);
  EXPECT_FALSE(validate_path(p, s, 0.30, 0.25, 0.025).collided);
}

TEST(ValidatePath, PassesBesideTheBox) {
  const SceneDescription s = slab_scene(0.0, 1.0);
  EXPECT_FALSE(validate_path(straight({0.5, 2.8}, {3.5, 2.8}), s, 0.5, 0.25, 0.025).collided);
  EXPECT_TRUE(validate_path(straight({0.5, 2.7}, {3.5, 2.7}), s, 0.5, 0.25, 0.025).collided);
}

TEST(ValidatePath, HalvingTheStepDoesNotChangeTheVerdict) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.2, 3.8), z(0.1, 1.2);
  const SceneDescription s = slab_scene(0.6, 0.8);
  for (int t = 0; t < 100; ++t) {
    Path p;
    for (int k = 0; k < 4; ++k) p.waypoints.emplace_back(u(rng), u(rng));
    const double fh = z(rng);
    const bool coarse = validate_path(p, s, fh, 0.2, 0.05).collided;
    EXPECT_EQ(coarse, validate_path(p, s, fh, 0.2, 0.025).collided) << t;
  }
}
