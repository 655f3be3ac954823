#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/polygon.hpp"

namespace semmap {

enum class ObjectClass { kChair, kCoffeeTable, kConferenceTable, kSofa, kWhiteboard, kDesk };

// How much free space an object leaves under its load-bearing surface.
enum class Structure { kHollowBottom, kPartlyHollow, kSolid };

std::string_view to_string(ObjectClass cls);
std::string_view to_string(Structure structure);
/// Throws Error(kFormat) for unknown names.
ObjectClass parse_object_class(std::string_view name);
Structure structure_of(ObjectClass cls);

/// Dimensions in metres, object frame (x along width, y along depth).
struct ShapeParams {
  double slab_width = 1.0;
  double slab_depth = 1.0;
  double slab_thickness = 0.04;
  double slab_top = 0.75;
  double leg_size = 0.05;
  double pedestal_width = 0.0;
  double pedestal_depth = 0.0;
};

ShapeParams default_shape(ObjectClass cls);

/// Box rotated about +z.
struct OrientedBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();
  double yaw = 0.0;

  double z_min() const { return center.z() - half_extents.z(); }
  double z_max() const { return center.z() + half_extents.z(); }
  /// Footprint corners, CCW.
  Polygon2 footprint() const;
};

struct SceneObject {
  int id = 0;
  ObjectClass cls = ObjectClass::kChair;
  RobotPose2D pose;
  ShapeParams shape;

  Structure structure() const { return structure_of(cls); }
  /// Slab + corner legs (hollow), plus a centre pedestal (partly hollow), or a
  /// single block (solid).
  std::vector<OrientedBox> boxes() const;
  void validate() const;
};

struct SceneDescription {
  std::vector<SceneObject> objects;
  std::vector<OrientedBox> walls;
  Box2 bounds{Point2(0.0, 0.0), Point2(10.0, 10.0)};

  void validate() const;
  const SceneObject* find(int id) const;
};

inline constexpr int kSceneSchemaVersion = 1;

SceneDescription parse_scene(std::string_view json_text);
SceneDescription load_scene(const std::filesystem::path& path);
std::string scene_to_json(const SceneDescription& scene);

/// Row-major z-depth in metres; kNoReturn marks pixels without a valid return.
struct DepthImage {
  static constexpr double kNoReturn = 0.0;

  int width = 0;
  int height = 0;
  std::vector<double> depths;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depths(static_cast<std::size_t>(w) * h, kNoReturn) {}

  double at(int u, int v) const { return depths[static_cast<std::size_t>(v) * width + u]; }
  double& at(int u, int v) { return depths[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) != kNoReturn; }
};

/// Pixel box given by centre and size. Pixel (u, v) lies inside when
/// x - w/2 <= u < x + w/2 and y - h/2 <= v < y + h/2.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - w / 2.0; }
  double top() const { return y - h / 2.0; }
  double right() const { return x + w / 2.0; }
  double bottom() const { return y + h / 2.0; }
  double area() const { return w * h; }
};

/// Integer pixel range covered by a box after clipping to the image.
struct PixelRange {
  int u0 = 0, v0 = 0;  // inclusive
  int u1 = 0, v1 = 0;  // exclusive

  bool empty() const { return u1 <= u0 || v1 <= v0; }
};
PixelRange pixel_range(const BBox& box, int width, int height);

struct Detection {
  BBox bbox;
  ObjectClass cls = ObjectClass::kChair;
  double confidence = 1.0;
};

/// Ray-cast z-depth of every pixel; hits outside [depth_min, depth_max] are
/// kNoReturn. Noise is additive Gaussian (seeded) and clamped to the range.
DepthImage render_depth(const SceneDescription& scene, const RigidTransform3& camera_pose,
                        const CameraModel& cam, double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Ground-truth detector. An object is reported when at least `min_pixels` of
/// its pixels win the depth test; the box is the extent of those pixels and
/// the confidence their share of the object's unoccluded projection.
std::vector<Detection> oracle_detect(const SceneDescription& scene, const RigidTransform3& camera_pose,
                                     const CameraModel& cam, int min_pixels = 50);

/// Maximal horizontal cross-section in map frame, CCW.
Polygon2 object_footprint(const SceneObject& obj);

struct TimedPose {
  double t = 0.0;
  RobotPose2D pose;
};

struct PoseNoise {
  double sigma_xy = 0.0;
  double sigma_theta = 0.0;
  std::uint64_t seed = 0;
};

/// Constant-speed polyline through the waypoints sampled every dt seconds;
/// headings follow the shortest arc between consecutive waypoints. The last
/// waypoint is always included.
std::vector<TimedPose> sample_trajectory(std::span<const RobotPose2D> waypoints, double speed, double dt,
                                         const PoseNoise& noise = {});

}  // namespace semmap
