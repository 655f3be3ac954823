#include <random>

#include <benchmark/benchmark.h>

#include "semmap/cloud.hpp"
#include "semmap/plane.hpp"
#include "semmap/planner.hpp"
#include "semmap/scene.hpp"

using namespace semmap;

namespace {

SceneDescription desk_scene() {
  SceneDescription s;
  s.bounds = {{0, 0}, {6, 6}};
  SceneObject desk;
  desk.id = 1;
  desk.cls = ObjectClass::kDesk;
  desk.pose = RobotPose2D(3, 3, 0.2);
  desk.shape = default_shape(desk.cls);
  s.objects.push_back(desk);
  return s;
}

PointCloud random_cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  PointCloud c{{}, CloudFrame::kMap};
  for (int i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), 0.7 + 0.01 * u(rng));
  return c;
}

}  // namespace

static void BM_RenderDepth(benchmark::State& state) {
  const SceneDescription scene = desk_scene();
  const CameraModel cam = default_camera();
  const RigidTransform3 pose = camera_in_world(RobotPose2D(1.2, 3, 0), camera_mount(0.15));
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(scene, pose, cam));
}
BENCHMARK(BM_RenderDepth)->Unit(benchmark::kMillisecond);

static void BM_EuclideanCluster(benchmark::State& state) {
  const PointCloud c = random_cloud(static_cast<int>(state.range(0)), 3);
  const ClusterParams p{0.05, 10, 1};
  for (auto _ : state) benchmark::DoNotOptimize(euclidean_cluster(c, p));
}
BENCHMARK(BM_EuclideanCluster)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_Ransac(benchmark::State& state) {
  const PointCloud c = random_cloud(static_cast<int>(state.range(0)), 4);
  RansacParams p;
  p.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ransac_plane(c, p));
}
BENCHMARK(BM_Ransac)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_Plan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GridGeometry g;
  g.resolution = 0.05;
  g.width = n;
  g.height = n;
  std::vector<std::uint8_t> cells(g.size(), 0);
  for (int y = 0; y < n - 10; ++y) cells[g.index({n / 2, y})] = 255;
  const OccupancyGrid grid = OccupancyGrid::from_values(g, cells);
  PlanRequest r;
  r.start = g.center({2, 2});
  r.goal = g.center({n - 3, 2});
  r.robot_radius = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(plan(grid, r));
}
BENCHMARK(BM_Plan)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
