#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/scene.hpp"

namespace semmap {

enum class CloudFrame { kCamera, kMap };

struct PointCloud {
  std::vector<Point3> points;
  CloudFrame frame = CloudFrame::kCamera;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Indices into the cloud a cluster was computed from, ascending.
using Cluster = std::vector<std::size_t>;

struct ClusterParams {
  double epsilon = 0.10;
  std::size_t min_cluster_size = 30;
  int stride = 2;
};

struct BackgroundParams {
  double bin_size = 0.05;
  int gap_bins = 2;
};

struct Aabb3 {
  Point3 min;
  Point3 max;
};

/// Back-projects every valid pixel of the box, visiting every `stride`-th
/// column and row from the box's first pixel. Throws kEmptyCloud.
PointCloud extract_roi_cloud(const DepthImage& depth, const BBox& box, const CameraModel& cam, int stride);

/// Keeps the run of occupied 0.05 m range bins that starts at the nearest
/// point and ends at the first gap of >= gap_bins empty bins.
PointCloud remove_background(const PointCloud& cloud, const BackgroundParams& params = {});

/// Connected components of the graph with edges between points at most
/// epsilon apart; components below min_cluster_size are dropped. Clusters are
/// ordered by their smallest index.
std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, const ClusterParams& params);

/// Most points wins; ties go to the cluster whose centroid is closest to the
/// frame origin. Throws kNoClusters on an empty list.
const Cluster& largest_cluster(const PointCloud& cloud, std::span<const Cluster> clusters);

PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices);

/// Per-coordinate mean. Throws kEmptyCloud.
Point3 centroid(const PointCloud& cloud);

/// Highest point above the z = 0 map plane, never negative. Throws kEmptyCloud.
double object_height(const PointCloud& map_cloud);

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform3& transform, CloudFrame target);

Aabb3 bounds(const PointCloud& cloud);

/// ASCII "x y z" per line.
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace semmap
