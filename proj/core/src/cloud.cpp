#include "semmap/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <unordered_map>

#include "semmap/error.hpp"

namespace semmap {

PointCloud extract_roi_cloud(const DepthImage& depth, const BBox& box, const CameraModel& cam, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (depth.width != cam.width || depth.height != cam.height)
    throw Error(ErrorCode::kInvalidArgument, "depth image does not match camera");
  const PixelRange r = pixel_range(box, depth.width, depth.height);
  if (r.empty()) throw Error(ErrorCode::kInvalidArgument, "bounding box does not overlap the image");

  PointCloud cloud;
  cloud.frame = CloudFrame::kCamera;
  for (int v = r.v0; v < r.v1; v += stride) {
    for (int u = r.u0; u < r.u1; u += stride) {
      const double d = depth.at(u, v);
      if (d == DepthImage::kNoReturn) continue;
      cloud.points.emplace_back((u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d);
    }
  }
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "no valid depth inside the bounding box");
  return cloud;
}

PointCloud remove_background(const PointCloud& cloud, const BackgroundParams& params) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "background removal on an empty cloud");
  if (!(params.bin_size > 0.0) || params.gap_bins < 1)
    throw Error(ErrorCode::kInvalidArgument, "background bin size and gap must be positive");

  double z_min = cloud.points[0].z();
  double z_max = z_min;
  for (const auto& p : cloud.points) {
    z_min = std::min(z_min, p.z());
    z_max = std::max(z_max, p.z());
  }
  const auto bins = static_cast<std::size_t>(std::floor((z_max - z_min) / params.bin_size)) + 1;
  auto bin_of = [&](double z) {
    return std::min(bins - 1, static_cast<std::size_t>(std::floor((z - z_min) / params.bin_size)));
  };
  std::vector<std::size_t> histogram(bins, 0);
  for (const auto& p : cloud.points) ++histogram[bin_of(p.z())];

  // Bin 0 holds the nearest point; walk until the gap is wide enough.
  std::size_t last = 0;
  int empty_run = 0;
  for (std::size_t b = 1; b < bins; ++b) {
    if (histogram[b] == 0) {
      if (++empty_run >= params.gap_bins) break;
    } else {
      empty_run = 0;
      last = b;
    }
  }

  PointCloud out;
  out.frame = cloud.frame;
  for (const auto& p : cloud.points) {
    if (bin_of(p.z()) <= last) out.points.push_back(p);
  }
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, const ClusterParams& params) {
  if (!(params.epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  const double eps = params.epsilon;
  const double eps2 = eps * eps;
  auto key_of = [eps](const Point3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / eps)),
                   static_cast<std::int64_t>(std::floor(p.y() / eps)),
                   static_cast<std::int64_t>(std::floor(p.z() / eps))};
  };

  // Cells hold only points not yet assigned to a cluster.
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  grid.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) grid[key_of(cloud.points[i])].push_back(i);

  std::vector<char> assigned(cloud.size(), 0);
  std::vector<Cluster> clusters;
  std::deque<std::size_t> frontier;

  auto claim = [&](std::size_t i) {
    auto& cell = grid[key_of(cloud.points[i])];
    cell.erase(std::find(cell.begin(), cell.end(), i));
    assigned[i] = 1;
  };

  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (assigned[seed]) continue;
    Cluster cluster;
    claim(seed);
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const std::size_t i = frontier.front();
      frontier.pop_front();
      cluster.push_back(i);
      const Point3& p = cloud.points[i];
      const CellKey k = key_of(p);
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
            if (it == grid.end()) continue;
            auto& members = it->second;
            for (std::size_t m = 0; m < members.size();) {
              const std::size_t j = members[m];
              if ((cloud.points[j] - p).squaredNorm() <= eps2) {
                assigned[j] = 1;
                frontier.push_back(j);
                members[m] = members.back();
                members.pop_back();
              } else {
                ++m;
              }
            }
          }
        }
      }
    }
    if (cluster.size() >= params.min_cluster_size) {
      std::sort(cluster.begin(), cluster.end());
      clusters.push_back(std::move(cluster));
    }
  }
  return clusters;
}

PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices) {
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(cloud.points.at(i));
  return out;
}

const Cluster& largest_cluster(const PointCloud& cloud, std::span<const Cluster> clusters) {
  if (clusters.empty()) throw Error(ErrorCode::kNoClusters, "no clusters to choose from");
  const Cluster* best = nullptr;
  double best_range = 0.0;
  for (const auto& c : clusters) {
    const double range = centroid(select(cloud, c)).norm();
    if (!best || c.size() > best->size() || (c.size() == best->size() && range < best_range)) {
      best = &c;
      best_range = range;
    }
  }
  return *best;
}

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "centroid of an empty cloud");
  Point3 sum = Point3::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

double object_height(const PointCloud& map_cloud) {
  if (map_cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "height of an empty cloud");
  double top = map_cloud.points[0].z();
  for (const auto& p : map_cloud.points) top = std::max(top, p.z());
  return std::max(0.0, top);
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform3& transform, CloudFrame target) {
  PointCloud out;
  out.frame = target;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(apply_transform(transform, p));
  return out;
}

Aabb3 bounds(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "bounds of an empty cloud");
  Aabb3 box{cloud.points[0], cloud.points[0]};
  for (const auto& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(6);
  out << std::fixed;
  for (const auto& p : cloud.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

}  // namespace semmap
