#include "semmap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semmap/error.hpp"

namespace semmap {

using nlohmann::json;

std::string_view to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kChair: return "chair";
    case ObjectClass::kCoffeeTable: return "coffee_table";
    case ObjectClass::kConferenceTable: return "conference_table";
    case ObjectClass::kSofa: return "sofa";
    case ObjectClass::kWhiteboard: return "whiteboard";
    case ObjectClass::kDesk: return "desk";
  }
  return "unknown";
}

std::string_view to_string(Structure structure) {
  switch (structure) {
    case Structure::kHollowBottom: return "hollow_bottom";
    case Structure::kPartlyHollow: return "partly_hollow";
    case Structure::kSolid: return "solid";
  }
  return "unknown";
}

ObjectClass parse_object_class(std::string_view name) {
  for (auto cls : {ObjectClass::kChair, ObjectClass::kCoffeeTable, ObjectClass::kConferenceTable,
                   ObjectClass::kSofa, ObjectClass::kWhiteboard, ObjectClass::kDesk}) {
    if (to_string(cls) == name) return cls;
  }
  throw Error(ErrorCode::kFormat, "unknown object class '" + std::string(name) + "'");
}

Structure structure_of(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kConferenceTable: return Structure::kPartlyHollow;
    case ObjectClass::kSofa: return Structure::kSolid;
    default: return Structure::kHollowBottom;
  }
}

ShapeParams default_shape(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kChair: return {0.50, 0.50, 0.04, 0.46, 0.04, 0.0, 0.0};
    case ObjectClass::kCoffeeTable: return {1.00, 0.60, 0.04, 0.45, 0.05, 0.0, 0.0};
    case ObjectClass::kDesk: return {1.20, 0.60, 0.03, 0.75, 0.05, 0.0, 0.0};
    case ObjectClass::kConferenceTable: return {2.00, 1.00, 0.04, 0.75, 0.06, 0.40, 0.40};
    case ObjectClass::kSofa: return {1.80, 0.80, 0.20, 0.85, 0.0, 0.0, 0.0};
    case ObjectClass::kWhiteboard: return {1.20, 0.06, 0.90, 1.90, 0.04, 0.0, 0.0};
  }
  return {};
}

Polygon2 OrientedBox::footprint() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Polygon2 out;
  out.reserve(4);
  const double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  for (int i = 0; i < 4; ++i) {
    const double lx = sx[i] * half_extents.x();
    const double ly = sy[i] * half_extents.y();
    out.emplace_back(center.x() + c * lx - s * ly, center.y() + s * lx + c * ly);
  }
  return out;
}

std::vector<OrientedBox> SceneObject::boxes() const {
  const ShapeParams& p = shape;
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  auto place = [&](double lx, double ly, double z_center, double hx, double hy, double hz) {
    return OrientedBox{Eigen::Vector3d(pose.x + c * lx - s * ly, pose.y + s * lx + c * ly, z_center),
                       Eigen::Vector3d(hx, hy, hz), pose.theta};
  };

  std::vector<OrientedBox> out;
  if (structure() == Structure::kSolid) {
    out.push_back(place(0.0, 0.0, p.slab_top / 2.0, p.slab_width / 2.0, p.slab_depth / 2.0, p.slab_top / 2.0));
    return out;
  }
  const double slab_bottom = p.slab_top - p.slab_thickness;
  out.push_back(place(0.0, 0.0, p.slab_top - p.slab_thickness / 2.0, p.slab_width / 2.0, p.slab_depth / 2.0,
                      p.slab_thickness / 2.0));
  const double lx = p.slab_width / 2.0 - p.leg_size / 2.0;
  const double ly = p.slab_depth / 2.0 - p.leg_size / 2.0;
  const double half_leg = p.leg_size / 2.0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      out.push_back(place(sx * lx, sy * ly, slab_bottom / 2.0, half_leg, half_leg, slab_bottom / 2.0));
    }
  }
  if (structure() == Structure::kPartlyHollow) {
    out.push_back(place(0.0, 0.0, slab_bottom / 2.0, p.pedestal_width / 2.0, p.pedestal_depth / 2.0,
                        slab_bottom / 2.0));
  }
  return out;
}

void SceneObject::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kFormat, "object " + std::to_string(id) + ": " + what);
  };
  const ShapeParams& p = shape;
  if (!(p.slab_width > 0.0 && p.slab_depth > 0.0)) fail("footprint dimensions must be positive");
  if (!(p.slab_thickness > 0.0 && p.slab_top > p.slab_thickness)) fail("need slab_top > slab_thickness > 0");
  if (structure() != Structure::kSolid) {
    if (!(p.leg_size > 0.0 && p.leg_size <= std::min(p.slab_width, p.slab_depth)))
      fail("leg_size must be positive and fit under the slab");
  }
  if (structure() == Structure::kPartlyHollow) {
    if (!(p.pedestal_width > 0.0 && p.pedestal_depth > 0.0 && p.pedestal_width <= p.slab_width &&
          p.pedestal_depth <= p.slab_depth))
      fail("pedestal must be positive and fit under the slab");
  }
}

void SceneDescription::validate() const {
  if (!(bounds.max.x() > bounds.min.x() && bounds.max.y() > bounds.min.y()))
    throw Error(ErrorCode::kFormat, "scene bounds are empty");
  std::set<int> ids;
  for (const auto& obj : objects) {
    obj.validate();
    if (!ids.insert(obj.id).second) throw Error(ErrorCode::kFormat, "duplicate object id " + std::to_string(obj.id));
    for (const auto& v : object_footprint(obj)) {
      if (v.x() < bounds.min.x() || v.y() < bounds.min.y() || v.x() > bounds.max.x() || v.y() > bounds.max.y())
        throw Error(ErrorCode::kFormat, "object " + std::to_string(obj.id) + " extends outside scene bounds");
    }
  }
  for (const auto& wall : walls) {
    if ((wall.half_extents.array() <= 0.0).any()) throw Error(ErrorCode::kFormat, "wall with empty extent");
  }
}

const SceneObject* SceneDescription::find(int id) const {
  for (const auto& obj : objects) {
    if (obj.id == id) return &obj;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kFormat, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Point2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kFormat, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void read_shape(const json& j, ShapeParams& p) {
  p.slab_width = j.value("slab_width", p.slab_width);
  p.slab_depth = j.value("slab_depth", p.slab_depth);
  p.slab_thickness = j.value("slab_thickness", p.slab_thickness);
  p.slab_top = j.value("slab_top", p.slab_top);
  p.leg_size = j.value("leg_size", p.leg_size);
  p.pedestal_width = j.value("pedestal_width", p.pedestal_width);
  p.pedestal_depth = j.value("pedestal_depth", p.pedestal_depth);
}

}  // namespace

SceneDescription parse_scene(std::string_view json_text) {
  SceneDescription scene;
  try {
    const json j = json::parse(json_text);
    const int schema = j.at("schema").get<int>();
    if (schema != kSceneSchemaVersion)
      throw Error(ErrorCode::kSchemaVersion, "scene schema " + std::to_string(schema) + " is not supported");
    scene.bounds = {vec2(j.at("bounds").at("min")), vec2(j.at("bounds").at("max"))};
    for (const auto& w : j.value("walls", json::array())) {
      const Eigen::Vector3d lo = vec3(w.at("min"));
      const Eigen::Vector3d hi = vec3(w.at("max"));
      scene.walls.push_back({(lo + hi) / 2.0, (hi - lo) / 2.0, 0.0});
    }
    for (const auto& o : j.at("objects")) {
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      obj.cls = parse_object_class(o.at("class").get<std::string>());
      obj.pose = RobotPose2D(o.at("x").get<double>(), o.at("y").get<double>(), o.value("yaw", 0.0));
      obj.shape = default_shape(obj.cls);
      if (o.contains("shape")) read_shape(o.at("shape"), obj.shape);
      scene.objects.push_back(obj);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("scene: ") + e.what());
  }
  scene.validate();
  return scene;
}

SceneDescription load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scene file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str());
}

std::string scene_to_json(const SceneDescription& scene) {
  json j;
  j["schema"] = kSceneSchemaVersion;
  j["bounds"] = {{"min", {scene.bounds.min.x(), scene.bounds.min.y()}},
                 {"max", {scene.bounds.max.x(), scene.bounds.max.y()}}};
  j["walls"] = json::array();
  for (const auto& w : scene.walls) {
    const Eigen::Vector3d lo = w.center - w.half_extents;
    const Eigen::Vector3d hi = w.center + w.half_extents;
    j["walls"].push_back({{"min", {lo.x(), lo.y(), lo.z()}}, {"max", {hi.x(), hi.y(), hi.z()}}});
  }
  j["objects"] = json::array();
  for (const auto& o : scene.objects) {
    const ShapeParams& p = o.shape;
    j["objects"].push_back({{"id", o.id},
                            {"class", std::string(to_string(o.cls))},
                            {"x", o.pose.x},
                            {"y", o.pose.y},
                            {"yaw", o.pose.theta},
                            {"shape",
                             {{"slab_width", p.slab_width},
                              {"slab_depth", p.slab_depth},
                              {"slab_thickness", p.slab_thickness},
                              {"slab_top", p.slab_top},
                              {"leg_size", p.leg_size},
                              {"pedestal_width", p.pedestal_width},
                              {"pedestal_depth", p.pedestal_depth}}}});
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Ray casting

namespace {

struct CastBox {
  Eigen::Vector3d center;
  Eigen::Vector3d half;
  double c = 1.0, s = 0.0;  // yaw
  int owner = -1;           // object index, -1 for walls
};

std::vector<CastBox> cast_boxes(const SceneDescription& scene) {
  std::vector<CastBox> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    for (const auto& b : scene.objects[i].boxes()) {
      out.push_back({b.center, b.half_extents, std::cos(b.yaw), std::sin(b.yaw), static_cast<int>(i)});
    }
  }
  for (const auto& w : scene.walls) {
    out.push_back({w.center, w.half_extents, std::cos(w.yaw), std::sin(w.yaw), -1});
  }
  return out;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Box expressed for one camera pose: a camera-frame ray r maps to the box
// frame as origin + dir_from_ray * r. Pixels outside [u0,u1) x [v0,v1) cannot
// hit it.
struct FrameBox {
  Eigen::Vector3d origin;
  Eigen::Matrix3d dir_from_ray;
  Eigen::Vector3d half;
  int owner = -1;
  int u0 = 0, u1 = 0, v0 = 0, v1 = 0;
  bool covers(int u, int v) const { return u >= u0 && u < u1 && v >= v0 && v < v1; }
};

std::vector<FrameBox> frame_boxes(const SceneDescription& scene, const RigidTransform3& camera_pose,
                                  const CameraModel& cam) {
  const Eigen::Matrix3d& rc = camera_pose.rotation();
  const Eigen::Vector3d& tc = camera_pose.translation();
  std::vector<FrameBox> out;
  for (const CastBox& b : cast_boxes(scene)) {
    Eigen::Matrix3d world_to_box;
    world_to_box << b.c, b.s, 0.0, -b.s, b.c, 0.0, 0.0, 0.0, 1.0;
    FrameBox f;
    f.origin = world_to_box * (tc - b.center);
    f.dir_from_ray = world_to_box * rc;
    f.half = b.half;
    f.owner = b.owner;

    // Pixel bounds from the projected corners when the box is fully in front.
    double u_lo = kInf, u_hi = -kInf, v_lo = kInf, v_hi = -kInf;
    bool in_front = true, behind = true;
    for (int k = 0; k < 8; ++k) {
      const Eigen::Vector3d local((k & 1 ? 1 : -1) * b.half.x(), (k & 2 ? 1 : -1) * b.half.y(),
                                  (k & 4 ? 1 : -1) * b.half.z());
      const Eigen::Vector3d world = b.center + world_to_box.transpose() * local;
      const Eigen::Vector3d p = rc.transpose() * (world - tc);
      if (p.z() > 1e-6) behind = false;
      if (p.z() <= 1e-6) {
        in_front = false;
        continue;
      }
      const double u = cam.cx + cam.fx * p.x() / p.z();
      const double v = cam.cy + cam.fy * p.y() / p.z();
      u_lo = std::min(u_lo, u);
      u_hi = std::max(u_hi, u);
      v_lo = std::min(v_lo, v);
      v_hi = std::max(v_hi, v);
    }
    if (behind) continue;
    if (in_front) {
      f.u0 = std::clamp(static_cast<int>(std::floor(u_lo)) - 1, 0, cam.width);
      f.u1 = std::clamp(static_cast<int>(std::ceil(u_hi)) + 2, 0, cam.width);
      f.v0 = std::clamp(static_cast<int>(std::floor(v_lo)) - 1, 0, cam.height);
      f.v1 = std::clamp(static_cast<int>(std::ceil(v_hi)) + 2, 0, cam.height);
    } else {
      f.u1 = cam.width;
      f.v1 = cam.height;
    }
    if (f.u0 < f.u1 && f.v0 < f.v1) out.push_back(f);
  }
  return out;
}

// Entry parameter along the ray into the box, or +inf on a miss. A ray
// starting inside a box counts as a miss.
double intersect(const FrameBox& b, const Eigen::Vector3d& ray) {
  const Eigen::Vector3d d = b.dir_from_ray * ray;
  double t_near = -kInf;
  double t_far = kInf;
  for (int k = 0; k < 3; ++k) {
    const double o = b.origin[k];
    if (std::abs(d[k]) < 1e-15) {
      if (std::abs(o) > b.half[k]) return kInf;
      continue;
    }
    double t1 = (-b.half[k] - o) / d[k];
    double t2 = (b.half[k] - o) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return kInf;
  }
  return t_near > 0.0 ? t_near : kInf;
}

// Camera-frame ray with unit optical-axis component, so the ray parameter is z-depth.
Eigen::Vector3d pixel_ray(const CameraModel& cam, int u, int v) {
  return {(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
}

bool in_range(double t, const CameraModel& cam) { return t >= cam.depth_min && t <= cam.depth_max; }

}  // namespace

DepthImage render_depth(const SceneDescription& scene, const RigidTransform3& camera_pose, const CameraModel& cam,
                        double noise_sigma, std::uint64_t seed) {
  cam.validate();
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  const auto boxes = frame_boxes(scene, camera_pose, cam);
  DepthImage image(cam.width, cam.height);

  for (int v = 0; v < cam.height; ++v) {
    // Per-row streams keep the noise independent of evaluation order.
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(v + 1)));
    std::normal_distribution<double> gauss(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d ray = pixel_ray(cam, u, v);
      double best = kInf;
      for (const auto& b : boxes) {
        if (b.covers(u, v)) best = std::min(best, intersect(b, ray));
      }
      if (!in_range(best, cam)) continue;
      double depth = best;
      if (noise_sigma > 0.0) depth = std::clamp(depth + gauss(rng), cam.depth_min, cam.depth_max);
      image.at(u, v) = depth;
    }
  }
  return image;
}

PixelRange pixel_range(const BBox& box, int width, int height) {
  PixelRange r;
  r.u0 = std::max(0, static_cast<int>(std::ceil(box.left())));
  r.v0 = std::max(0, static_cast<int>(std::ceil(box.top())));
  r.u1 = std::min(width, static_cast<int>(std::ceil(box.right())));
  r.v1 = std::min(height, static_cast<int>(std::ceil(box.bottom())));
  return r;
}

std::vector<Detection> oracle_detect(const SceneDescription& scene, const RigidTransform3& camera_pose,
                                     const CameraModel& cam, int min_pixels) {
  cam.validate();
  const auto boxes = frame_boxes(scene, camera_pose, cam);
  const std::size_t n_obj = scene.objects.size();

  struct Extent {
    int u_min = std::numeric_limits<int>::max(), v_min = std::numeric_limits<int>::max();
    int u_max = -1, v_max = -1;
    long visible = 0;
    long unoccluded = 0;
  };
  std::vector<Extent> ext(n_obj);
  std::vector<double> own(n_obj);

  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d ray = pixel_ray(cam, u, v);
      std::fill(own.begin(), own.end(), kInf);
      double best = kInf;
      int owner = -1;
      for (const auto& b : boxes) {
        if (!b.covers(u, v)) continue;
        const double t = intersect(b, ray);
        if (t < best) {
          best = t;
          owner = b.owner;
        }
        if (b.owner >= 0) own[b.owner] = std::min(own[b.owner], t);
      }
      for (std::size_t k = 0; k < n_obj; ++k) {
        if (in_range(own[k], cam)) ++ext[k].unoccluded;
      }
      if (owner < 0 || !in_range(best, cam)) continue;
      Extent& e = ext[owner];
      ++e.visible;
      e.u_min = std::min(e.u_min, u);
      e.u_max = std::max(e.u_max, u);
      e.v_min = std::min(e.v_min, v);
      e.v_max = std::max(e.v_max, v);
    }
  }

  std::vector<Detection> out;
  for (std::size_t k = 0; k < n_obj; ++k) {
    const Extent& e = ext[k];
    if (e.visible < min_pixels || e.visible == 0) continue;
    Detection det;
    det.bbox = {(e.u_min + e.u_max) / 2.0, (e.v_min + e.v_max) / 2.0, double(e.u_max - e.u_min + 1),
                double(e.v_max - e.v_min + 1)};
    det.cls = scene.objects[k].cls;
    det.confidence = static_cast<double>(e.visible) / static_cast<double>(e.unoccluded);
    out.push_back(det);
  }
  return out;
}

Polygon2 object_footprint(const SceneObject& obj) {
  OrientedBox base{Eigen::Vector3d(obj.pose.x, obj.pose.y, 0.0),
                   Eigen::Vector3d(obj.shape.slab_width / 2.0, obj.shape.slab_depth / 2.0, 0.0), obj.pose.theta};
  return base.footprint();
}

// ---------------------------------------------------------------------------
// Trajectories

std::vector<TimedPose> sample_trajectory(std::span<const RobotPose2D> waypoints, double speed, double dt,
                                         const PoseNoise& noise) {
  if (waypoints.empty()) throw Error(ErrorCode::kEmptyTrajectory, "no waypoints");
  if (!(speed > 0.0)) throw Error(ErrorCode::kInvalidArgument, "speed must be positive");
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");

  // Cumulative segment end times.
  std::vector<double> ends;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const double len = std::hypot(waypoints[i + 1].x - waypoints[i].x, waypoints[i + 1].y - waypoints[i].y);
    total += len / speed;
    ends.push_back(total);
  }

  auto pose_at = [&](double t) {
    std::size_t seg = 0;
    while (seg < ends.size() && t > ends[seg]) ++seg;
    if (seg >= ends.size()) return waypoints.back();
    const double start = seg == 0 ? 0.0 : ends[seg - 1];
    const double span = ends[seg] - start;
    const double alpha = span > 0.0 ? (t - start) / span : 1.0;
    const RobotPose2D& a = waypoints[seg];
    const RobotPose2D& b = waypoints[seg + 1];
    const double dtheta = normalize_angle(b.theta - a.theta);
    return RobotPose2D(a.x + alpha * (b.x - a.x), a.y + alpha * (b.y - a.y), a.theta + alpha * dtheta);
  };

  std::vector<TimedPose> out;
  const auto steps = static_cast<std::size_t>(std::floor(total / dt + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.push_back({t, pose_at(t)});
  }
  if (total - static_cast<double>(steps) * dt > 1e-9) out.push_back({total, waypoints.back()});
  if (waypoints.size() > 1 && ends.back() == 0.0) out.back().pose = waypoints.back();

  if (noise.sigma_xy > 0.0 || noise.sigma_theta > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& tp : out) {
      const double dx = noise.sigma_xy * gauss(rng);
      const double dy = noise.sigma_xy * gauss(rng);
      const double dth = noise.sigma_theta * gauss(rng);
      tp.pose = RobotPose2D(tp.pose.x + dx, tp.pose.y + dy, tp.pose.theta + dth);
    }
  }
  return out;
}

}  // namespace semmap
