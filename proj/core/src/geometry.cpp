#include "semmap/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "semmap/error.hpp"

namespace semmap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidDepth: return "InvalidDepth";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kNoClusters: return "NoClusters";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kInsufficientConsensus: return "InsufficientConsensus";
    case ErrorCode::kPoseOutsideGrid: return "PoseOutsideGrid";
    case ErrorCode::kFootprintOutsideGrid: return "FootprintOutsideGrid";
    case ErrorCode::kGeometryMismatch: return "GeometryMismatch";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kStartOrGoalLethal: return "StartOrGoalLethal";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kSchemaVersion: return "SchemaVersionError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

namespace {

constexpr double kRotationTolerance = 1e-9;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

bool is_rotation(const Eigen::Matrix3d& r) {
  if (!r.allFinite()) return false;
  const double ortho_err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho_err <= kRotationTolerance && std::abs(r.determinant() - 1.0) <= kRotationTolerance;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace

CameraModel CameraModel::from_fov(int width, int height, double hfov_deg, double vfov_deg,
                                  double depth_min, double depth_max) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.fx = cam.cx / std::tan(deg2rad(hfov_deg / 2.0));
  cam.fy = cam.cy / std::tan(deg2rad(vfov_deg / 2.0));
  cam.depth_min = depth_min;
  cam.depth_max = depth_max;
  cam.validate();
  return cam;
}

void CameraModel::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, "camera: " + what); };
  if (width <= 0 || height <= 0) fail("image size must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) fail("focal lengths must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) fail("principal point outside image");
  if (!(depth_min > 0.0 && depth_min < depth_max) || !std::isfinite(depth_max))
    fail("depth range must satisfy 0 < depth_min < depth_max");
}

CameraModel default_camera() { return CameraModel::from_fov(640, 480, 90.0, 58.0, 0.2, 8.0); }

RigidTransform3::RigidTransform3()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

RigidTransform3::RigidTransform3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) throw Error(ErrorCode::kInvalidArgument, "rotation is not in SO(3)");
  if (!translation_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "translation is not finite");
}

RigidTransform3 RigidTransform3::from_translation(const Eigen::Vector3d& translation) {
  return {Eigen::Matrix3d::Identity(), translation};
}

RigidTransform3 RigidTransform3::from_yaw(double yaw, const Eigen::Vector3d& translation) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return {r, translation};
}

RigidTransform3 RigidTransform3::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

Eigen::Matrix4d RigidTransform3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Point3 apply_transform(const RigidTransform3& transform, const Point3& p) {
  return transform.rotation() * p + transform.translation();
}

RigidTransform3 compose(const RigidTransform3& a, const RigidTransform3& b) {
  Eigen::Matrix3d r = a.rotation() * b.rotation();
  const double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (drift > kRotationTolerance) r = orthonormalize(r);
  return {r, a.rotation() * b.translation() + a.translation()};
}

double normalize_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

RigidTransform3 pose_to_transform(const RobotPose2D& pose) {
  return RigidTransform3::from_yaw(pose.theta, Eigen::Vector3d(pose.x, pose.y, 0.0));
}

RigidTransform3 camera_mount(double height, double forward) {
  // Columns are the camera axes expressed in the robot frame.
  Eigen::Matrix3d r;
  r << 0.0, 0.0, 1.0,
      -1.0, 0.0, 0.0,
      0.0, -1.0, 0.0;
  return {r, Eigen::Vector3d(forward, 0.0, height)};
}

Point3 back_project(Pixel px, double depth, const CameraModel& cam) {
  if (!std::isfinite(depth) || depth < cam.depth_min || depth > cam.depth_max)
    throw Error(ErrorCode::kInvalidDepth, "depth " + std::to_string(depth) + " outside sensor range");
  if (!cam.contains(px)) throw Error(ErrorCode::kInvalidArgument, "pixel outside image");
  return {(px.u - cam.cx) * depth / cam.fx, (px.v - cam.cy) * depth / cam.fy, depth};
}

Pixel project_point(const Point3& p, const CameraModel& cam) {
  if (!(p.z() > 0.0)) throw Error(ErrorCode::kBehindCamera, "point at or behind the image plane");
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

RigidTransform3 camera_in_world(const RobotPose2D& pose, const RigidTransform3& cam_in_robot) {
  return compose(pose_to_transform(pose), cam_in_robot);
}

Point3 object_to_map(const Point3& p_camera, const RobotPose2D& pose, const RigidTransform3& cam_in_robot) {
  return apply_transform(camera_in_world(pose, cam_in_robot), p_camera);
}

}  // namespace semmap
