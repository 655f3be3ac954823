#pragma once

#include <Eigen/Core>

namespace semmap {

using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;

// Continuous pixel coordinates; integer values are pixel centers.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole intrinsics plus the valid depth range of the sensor.
struct CameraModel {
  int width = 640;
  int height = 480;
  double fx = 320.0;
  double fy = 240.0;
  double cx = 320.0;
  double cy = 240.0;
  double depth_min = 0.2;
  double depth_max = 8.0;

  /// Builds intrinsics from full horizontal/vertical fields of view with the
  /// principal point at the image center.
  static CameraModel from_fov(int width, int height, double hfov_deg, double vfov_deg,
                              double depth_min, double depth_max);

  /// Throws Error(kInvalidArgument) when an invariant is violated.
  void validate() const;

  bool contains(Pixel px) const {
    return px.u >= 0.0 && px.v >= 0.0 && px.u <= width - 1 && px.v <= height - 1;
  }
};

/// 640x480, 90 deg horizontal and 58 deg vertical field of view.
CameraModel default_camera();

class RigidTransform3 {
 public:
  RigidTransform3();
  /// Throws Error(kInvalidArgument) unless rotation is orthonormal with det +1
  /// (tolerance 1e-9) and every entry is finite.
  RigidTransform3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform3 identity() { return {}; }
  static RigidTransform3 from_translation(const Eigen::Vector3d& translation);
  static RigidTransform3 from_yaw(double yaw, const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  RigidTransform3 inverse() const;
  Eigen::Matrix4d matrix() const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Point3 apply_transform(const RigidTransform3& transform, const Point3& p);

/// (a ∘ b)(p) == a(b(p)). Rotation drift above 1e-9 is projected back onto SO(3).
RigidTransform3 compose(const RigidTransform3& a, const RigidTransform3& b);

/// Wraps to (-pi, pi].
double normalize_angle(double theta);

struct RobotPose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  RobotPose2D() = default;
  RobotPose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}
};

/// SE(3) embedding of a planar pose (z = 0, rotation about +z).
RigidTransform3 pose_to_transform(const RobotPose2D& pose);

/// Camera-in-robot mount: optical axis along robot +x, image x to robot -y,
/// image y to robot -z, lens at `height` above the robot origin.
RigidTransform3 camera_mount(double height = 0.3, double forward = 0.0);

/// ((u - cx) d / fx, (v - cy) d / fy, d). Throws kInvalidDepth for depths outside
/// [depth_min, depth_max] or non-finite, kInvalidArgument for pixels off the image.
Point3 back_project(Pixel px, double depth, const CameraModel& cam);

/// Inverse of back_project; the result may fall outside the image.
/// Throws kBehindCamera when p.z <= 0.
Pixel project_point(const Point3& p, const CameraModel& cam);

/// Camera-frame point to map frame: pose_to_transform(pose) ∘ cam_in_robot.
Point3 object_to_map(const Point3& p_camera, const RobotPose2D& pose, const RigidTransform3& cam_in_robot);

/// World pose of the camera for a robot pose.
RigidTransform3 camera_in_world(const RobotPose2D& pose, const RigidTransform3& cam_in_robot);

}  // namespace semmap
