#include "semmap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "semmap/error.hpp"
#include "semmap/map_io.hpp"

namespace semmap {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

Point2 point2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) config_error(std::string(what) + ": expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

template <typename T>
void read_opt(const json& block, const char* key, T& out) {
  if (block.contains(key)) out = block.at(key).get<T>();
}

CameraModel parse_camera(const json& c) {
  const int w = c.value("width", 640);
  const int h = c.value("height", 480);
  const double dmin = c.value("depth_min", 0.2);
  const double dmax = c.value("depth_max", 8.0);
  CameraModel cam;
  if (c.contains("fx")) {
    cam.width = w;
    cam.height = h;
    cam.fx = c.at("fx").get<double>();
    cam.fy = c.value("fy", cam.fx);
    cam.cx = c.value("cx", (w - 1) / 2.0);
    cam.cy = c.value("cy", (h - 1) / 2.0);
    cam.depth_min = dmin;
    cam.depth_max = dmax;
  } else {
    cam = CameraModel::from_fov(w, h, c.value("hfov_deg", 90.0), c.value("vfov_deg", 58.0), dmin, dmax);
  }
  cam.validate();
  return cam;
}

std::vector<RobotPose2D> expand_orbit(const Orbit& o) {
  std::vector<RobotPose2D> out;
  const int n = std::max(o.points, 1);
  const bool closed = std::abs(std::abs(o.sweep_deg) - 360.0) < 1e-9;
  for (int k = 0; k < n; ++k) {
    const double frac = closed || n == 1 ? static_cast<double>(k) / n : static_cast<double>(k) / (n - 1);
    const double a = (o.start_deg + frac * o.sweep_deg) * std::numbers::pi / 180.0;
    const Point2 p = o.center + o.radius * Point2(std::cos(a), std::sin(a));
    const Point2 d = o.center - p;
    out.emplace_back(p.x(), p.y(), std::atan2(d.y(), d.x()));
  }
  return out;
}

struct FrameInput {
  DepthImage depth;
  std::vector<Detection> detections;
  Scan2D scan;
  double render_ms = 0.0;
  double detect_ms = 0.0;
  double scan_ms = 0.0;
};

// Box reaching the image border: the object is probably cut off.
bool truncated(const BBox& b, const CameraModel& cam) {
  return b.left() <= 0.5 || b.top() <= 0.5 || b.right() >= cam.width - 0.5 || b.bottom() >= cam.height - 0.5;
}

std::string code_name(ErrorCode c) { return std::string(to_string(c)); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

void write_paths_csv(const fs::path& file, const RunResult& r) {
  std::ostringstream ss;
  ss << "path,index,x,y\n";
  auto emit = [&](const char* name, const PlanResult& p) {
    for (std::size_t i = 0; i < p.path.waypoints.size(); ++i) {
      ss << name << ',' << i << ',' << fmt(p.path.waypoints[i].x()) << ',' << fmt(p.path.waypoints[i].y()) << '\n';
    }
  };
  emit("metric", r.metric_plan);
  emit("semantic", r.semantic_plan);
  write_text_file(file, ss.str());
}

json plan_json(const PlanResult& p) {
  json j = {{"status", p.status}};
  if (p.status != "ok") return j;
  double length = 0.0;
  for (std::size_t i = 1; i < p.path.waypoints.size(); ++i) length += (p.path.waypoints[i] - p.path.waypoints[i - 1]).norm();
  j["cost"] = p.path.cost;
  j["length"] = length;
  j["waypoints"] = p.path.waypoints.size();
  j["collided"] = p.collision.collided;
  if (p.collision.collided) {
    j["waypoint_index"] = *p.collision.waypoint_index;
    j["at"] = {p.collision.where.x(), p.collision.where.y()};
    if (p.collision.object_id) j["object_id"] = *p.collision.object_id;
    if (p.collision.wall_index) j["wall_index"] = *p.collision.wall_index;
  }
  return j;
}

// Verdict string used by the report and the eval table.
std::string verdict(const json& plan) {
  const std::string status = plan.at("status").get<std::string>();
  if (status != "ok") return status;
  return plan.at("collided").get<bool>() ? "COLLIDING" : "FREE";
}

PlanResult run_plan(const OccupancyGrid& costmap, const PlanRequest& req, const SceneDescription& scene) {
  PlanResult out;
  try {
    out.path = plan(costmap, req);
    out.status = "ok";
    out.collision = validate_path(out.path, scene, req.flight_height, req.robot_radius,
                                  costmap.geometry().resolution / 2.0);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoPath) {
      out.status = "no_path";
    } else if (e.code() == ErrorCode::kStartOrGoalLethal) {
      out.status = "start_or_goal_lethal";
    } else {
      throw;
    }
  }
  return out;
}

CorridorResult probe_corridor(const CorridorProbe& probe, const OccupancyGrid& inflated, const PlanRequest& req,
                              const SceneDescription& scene) {
  CorridorResult r;
  r.name = probe.name;
  Path segment;
  segment.waypoints = {probe.from, probe.to};
  r.truly_free = !validate_path(segment, scene, req.flight_height, req.robot_radius,
                                inflated.geometry().resolution / 2.0)
                      .collided;
  const GridGeometry& g = inflated.geometry();
  const double len = (probe.to - probe.from).norm();
  const int samples = std::max(1, static_cast<int>(std::ceil(len / (g.resolution / 2.0))));
  for (int k = 0; k <= samples; ++k) {
    const Point2 p = probe.from + (probe.to - probe.from) * (static_cast<double>(k) / samples);
    const Cell c = g.cell_of(p);
    if (!g.contains(c)) continue;
    if (inflated.value(c) >= req.lethal_threshold) {
      r.blocked = true;
      break;
    }
  }
  return r;
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) config_error("config must be a JSON object");
    if (j.value("schema", -1) != kConfigSchemaVersion)
      config_error("unsupported config schema (expected " + std::to_string(kConfigSchemaVersion) + ")");
    ScenarioConfig c;
    c.name = j.value("name", std::string("scenario"));
    if (!j.contains("scene")) config_error("missing 'scene'");
    c.scene_path = base_dir / j.at("scene").get<std::string>();
    if (!fs::exists(c.scene_path)) config_error("scene file not found: " + c.scene_path.string());
    if (!j.contains("seed")) config_error("missing 'seed'");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) c.output_dir = base_dir / j.at("output").get<std::string>();

    c.camera = parse_camera(j.value("camera", json::object()));
    if (j.contains("camera")) {
      read_opt(j["camera"], "mount_height", c.mount_height);
      read_opt(j["camera"], "mount_forward", c.mount_forward);
      read_opt(j["camera"], "depth_noise", c.depth_noise);
    }

    if (!j.contains("trajectory")) config_error("missing 'trajectory'");
    const json& t = j.at("trajectory");
    // Entries are [x, y, theta] or {"orbit": {...}}, expanded in order.
    for (const auto& w : t.value("waypoints", json::array())) {
      if (w.is_object() && w.contains("orbit")) {
        const json& o = w.at("orbit");
        Orbit orbit;
        orbit.center = point2(o.at("center"), "orbit center");
        read_opt(o, "radius", orbit.radius);
        read_opt(o, "start_deg", orbit.start_deg);
        read_opt(o, "sweep_deg", orbit.sweep_deg);
        read_opt(o, "points", orbit.points);
        if (!(orbit.radius > 0.0) || orbit.points < 1) config_error("orbit needs radius > 0 and points >= 1");
        const auto pts = expand_orbit(orbit);
        c.waypoints.insert(c.waypoints.end(), pts.begin(), pts.end());
        continue;
      }
      if (!w.is_array() || w.size() != 3) config_error("trajectory waypoint: expected [x, y, theta] or an orbit");
      c.waypoints.emplace_back(w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>());
    }
    if (c.waypoints.empty()) config_error("trajectory has no waypoints");
    read_opt(t, "speed", c.speed);
    read_opt(t, "dt", c.dt);
    if (t.contains("pose_noise")) {
      read_opt(t["pose_noise"], "sigma_xy", c.pose_noise.sigma_xy);
      read_opt(t["pose_noise"], "sigma_theta", c.pose_noise.sigma_theta);
    }

    if (j.contains("detector")) {
      const json& d = j["detector"];
      read_opt(d, "min_pixels", c.min_pixels);
      read_opt(d, "skip_truncated", c.skip_truncated);
      if (d.contains("external")) {
        c.external_detections = base_dir / d.at("external").get<std::string>();
        if (!fs::exists(*c.external_detections))
          config_error("detections file not found: " + c.external_detections->string());
      }
    }
    if (j.contains("tracker")) {
      const json& b = j["tracker"];
      read_opt(b, "n_init", c.tracker.n_init);
      read_opt(b, "max_age", c.tracker.max_age);
      read_opt(b, "iou_min", c.tracker.iou_min);
      read_opt(b, "sigma_px", c.tracker.measurement.sigma_px);
    }
    if (j.contains("background")) {
      read_opt(j["background"], "bin_size", c.background.bin_size);
      read_opt(j["background"], "gap_bins", c.background.gap_bins);
    }
    if (j.contains("cluster")) {
      const json& b = j["cluster"];
      read_opt(b, "epsilon", c.cluster.epsilon);
      read_opt(b, "min_cluster_size", c.cluster.min_cluster_size);
      read_opt(b, "stride", c.cluster.stride);
    }
    c.ransac.min_normal_z = 0.7;
    if (j.contains("ransac")) {
      const json& b = j["ransac"];
      read_opt(b, "iterations", c.ransac.iterations);
      read_opt(b, "threshold", c.ransac.inlier_threshold);
      read_opt(b, "min_inlier_ratio", c.ransac.min_inlier_ratio);
      read_opt(b, "min_normal_z", c.ransac.min_normal_z);
    }
    if (j.contains("map")) {
      const json& b = j["map"];
      read_opt(b, "resolution", c.resolution);
      read_opt(b, "sigma", c.sigma);
      read_opt(b, "merge_radius", c.merge_radius);
      read_opt(b, "scan_band", c.scan_band);
      read_opt(b, "l_occ", c.log_odds.l_occ);
      read_opt(b, "l_free", c.log_odds.l_free);
      read_opt(b, "l_min", c.log_odds.l_min);
      read_opt(b, "l_max", c.log_odds.l_max);
    }
    if (!j.contains("planner")) config_error("missing 'planner'");
    const json& p = j.at("planner");
    c.plan.start = point2(p.at("start"), "planner start");
    c.plan.goal = point2(p.at("goal"), "planner goal");
    read_opt(p, "lethal_threshold", c.plan.lethal_threshold);
    read_opt(p, "cost_weight", c.plan.cost_weight);
    read_opt(p, "robot_radius", c.plan.robot_radius);
    read_opt(p, "flight_height", c.plan.flight_height);
    for (const auto& probe : j.value("corridors", json::array())) {
      c.corridors.push_back({probe.value("name", std::string("corridor")), point2(probe.at("from"), "corridor from"),
                             point2(probe.at("to"), "corridor to")});
    }

    if (!(c.speed > 0.0 && c.dt > 0.0)) config_error("trajectory speed and dt must be positive");
    if (!(c.resolution > 0.0 && c.sigma > 0.0)) config_error("map resolution and sigma must be positive");
    if (c.cluster.stride < 1) config_error("cluster stride must be >= 1");
    try {
      c.plan.validate();
    } catch (const Error& e) {
      config_error(std::string("planner: ") + e.what());
    }
    return c;
  } catch (const json::exception& e) {
    config_error(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(e.what());
  }
}

ScenarioConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    config_error("cannot read config file: " + path.string());
  }
  return parse_config(text, path.parent_path());
}

std::string detections_to_json(const FrameDetections& frames) {
  json out = json::array();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    json dets = json::array();
    for (const auto& d : frames[f]) {
      dets.push_back({{"class", std::string(to_string(d.cls))},
                      {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                      {"confidence", d.confidence}});
    }
    out.push_back({{"frame", f}, {"detections", std::move(dets)}});
  }
  return json{{"schema", kDetectionsSchemaVersion}, {"frames", std::move(out)}}.dump(1) + "\n";
}

FrameDetections parse_detections(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("detections: ") + e.what());
  }
  try {
    if (j.value("schema", -1) != kDetectionsSchemaVersion)
      throw Error(ErrorCode::kSchemaVersion, "detections: unsupported schema");
    FrameDetections frames;
    for (const auto& fr : j.at("frames")) {
      const auto idx = fr.at("frame").get<std::size_t>();
      if (idx >= frames.size()) frames.resize(idx + 1);
      for (const auto& d : fr.at("detections")) {
        Detection det;
        det.cls = parse_object_class(d.at("class").get<std::string>());
        const auto& b = d.at("bbox");
        if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::kFormat, "detections: bbox needs 4 numbers");
        det.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
        if (!(det.bbox.w > 0.0 && det.bbox.h > 0.0)) throw Error(ErrorCode::kFormat, "detections: empty bbox");
        det.confidence = d.value("confidence", 1.0);
        if (!(det.confidence >= 0.0 && det.confidence <= 1.0))
          throw Error(ErrorCode::kFormat, "detections: confidence outside [0, 1]");
        frames[idx].push_back(det);
      }
    }
    return frames;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("detections: ") + e.what());
  }
}

RunResult run_pipeline(const ScenarioConfig& config, const RunOptions& options) {
  const SceneDescription scene = load_scene(config.scene_path);
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const fs::path out_dir = options.output_dir.value_or(config.output_dir);
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);
  if (write && options.dump_clouds) fs::create_directories(out_dir / "clouds");

  const RigidTransform3 mount = camera_mount(config.mount_height, config.mount_forward);
  const auto truth = sample_trajectory(config.waypoints, config.speed, config.dt);
  PoseNoise noise = config.pose_noise;
  noise.seed = seed ^ 0x9e3779b97f4a7c15ULL;
  const auto estimate = sample_trajectory(config.waypoints, config.speed, config.dt, noise);
  const std::size_t n_frames = truth.size();

  std::optional<FrameDetections> external;
  if (config.external_detections) external = parse_detections(read_text_file(*config.external_detections));

  // Rendering, detection and scan extraction are independent per frame and
  // run in batches; everything touching the map runs in trajectory order.
  auto prepare = [&](std::size_t f) {
    FrameInput in;
    const RigidTransform3 cam_pose = camera_in_world(truth[f].pose, mount);
    auto t0 = Clock::now();
    in.depth = render_depth(scene, cam_pose, config.camera, config.depth_noise, seed + 1000003ULL * (f + 1));
    in.render_ms = ms_since(t0);
    t0 = Clock::now();
    if (external) {
      if (f < external->size()) in.detections = (*external)[f];
    } else {
      in.detections = oracle_detect(scene, cam_pose, config.camera, config.min_pixels);
    }
    in.detect_ms = ms_since(t0);
    t0 = Clock::now();
    in.scan = depth_to_scan(in.depth, config.camera, config.scan_band);
    in.scan_ms = ms_since(t0);
    return in;
  };

  RunResult result;
  result.scenario = config.name;
  result.seed = seed;
  result.frames = n_frames;
  result.metric_only = options.metric_only;

  const GridGeometry geometry = GridGeometry::covering(scene.bounds, config.resolution);
  OccupancyGrid metric(geometry, config.log_odds);
  ObjectRegistry registry(config.merge_radius);
  Tracker tracker(config.tracker);
  FrameDetections exported;

  std::ostringstream log;
  std::ostringstream trace;
  trace << "frame,track_id,class,x,y,w,h,record_id\n";

  StageTimings total;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t batch = options.workers > 0 ? static_cast<std::size_t>(options.workers) : hw;

  for (std::size_t begin = 0; begin < n_frames; begin += batch) {
    const std::size_t end = std::min(n_frames, begin + batch);
    std::vector<FrameInput> inputs(end - begin);
    if (batch == 1) {
      inputs[0] = prepare(begin);
    } else {
      std::vector<std::future<FrameInput>> futures;
      for (std::size_t f = begin; f < end; ++f) futures.push_back(std::async(std::launch::async, prepare, f));
      for (std::size_t f = begin; f < end; ++f) inputs[f - begin] = futures[f - begin].get();
    }

    for (std::size_t f = begin; f < end; ++f) {
      FrameInput& in = inputs[f - begin];
      const RobotPose2D& pose = estimate[f].pose;
      total.render_ms += in.render_ms;
      if (options.export_detections) exported.push_back(in.detections);

      auto t0 = Clock::now();
      const double c = std::cos(pose.theta), s = std::sin(pose.theta);
      const RobotPose2D sensor(pose.x + config.mount_forward * c, pose.y + config.mount_forward * s, pose.theta);
      try {
        integrate_scan(metric, sensor, in.scan);
      } catch (const Error& e) {
        log << "frame " << f << ": scan skipped: " << e.what() << '\n';
        ++result.dropped[code_name(e.code())];
      }
      total.scan_map_ms += in.scan_ms + ms_since(t0);

      t0 = Clock::now();
      const std::vector<Track> confirmed = tracker.step(in.detections, static_cast<long>(f));
      total.detect_track_ms += in.detect_ms + ms_since(t0);

      if (options.metric_only) continue;
      t0 = Clock::now();
      const RigidTransform3 cam_to_map = camera_in_world(pose, mount);
      for (const Track& track : confirmed) {
        if (track.misses != 0 || !track.detection) continue;
        const Detection& det = *track.detection;
        if (config.skip_truncated && truncated(det.bbox, config.camera)) {
          ++result.dropped["truncated"];
          continue;
        }
        try {
          const PointCloud roi = extract_roi_cloud(in.depth, det.bbox, config.camera, config.cluster.stride);
          const PointCloud fg = remove_background(roi, config.background);
          const auto clusters = euclidean_cluster(fg, config.cluster);
          const Cluster& best = largest_cluster(fg, clusters);
          const PointCloud map_cloud = transform_cloud(select(fg, best), cam_to_map, CloudFrame::kMap);
          if (write && options.dump_clouds) {
            write_xyz(map_cloud, out_dir / "clouds" /
                                     ("f" + std::to_string(f) + "_t" + std::to_string(track.track_id) + ".xyz"));
          }
          RansacParams rp = config.ransac;
          rp.seed = seed * 1315423911ULL + f * 7919ULL + static_cast<std::uint64_t>(track.track_id);
          const PlaneFit fit = ransac_plane(map_cloud, rp);
          const PointCloud inliers = select(map_cloud, fit.inliers);
          const auto flat = project_inliers_to_map(inliers);
          ObjectObservation obs;
          obs.cls = det.cls;
          obs.footprint = footprint_hull(flat);
          obs.position = polygon_centroid(obs.footprint);
          obs.height = object_height(map_cloud);
          obs.confidence = det.confidence;
          const int id = registry.register_object(obs);
          if (options.trace) {
            trace << f << ',' << track.track_id << ',' << to_string(det.cls) << ',' << fmt(det.bbox.x, 2) << ','
                  << fmt(det.bbox.y, 2) << ',' << fmt(det.bbox.w, 2) << ',' << fmt(det.bbox.h, 2) << ',' << id
                  << '\n';
          }
        } catch (const Error& e) {
          log << "frame " << f << " track " << track.track_id << ": dropped: " << e.what() << '\n';
          ++result.dropped[code_name(e.code())];
          if (options.trace) {
            trace << f << ',' << track.track_id << ',' << to_string(det.cls) << ',' << fmt(det.bbox.x, 2) << ','
                  << fmt(det.bbox.y, 2) << ',' << fmt(det.bbox.w, 2) << ',' << fmt(det.bbox.h, 2) << ",\n";
          }
        }
      }
      total.cloud_plane_ms += ms_since(t0);
    }
  }

  SemanticLayer semantic(geometry);
  if (!options.metric_only) {
    for (const auto& rec : registry.records()) {
      try {
        stamp_semantic_footprint(semantic, rec, config.sigma);
      } catch (const Error& e) {
        log << "record " << rec.id << ": not stamped: " << e.what() << '\n';
        ++result.dropped[code_name(e.code())];
      }
    }
  }
  const OccupancyGrid costmap = compose_costmap(metric, semantic);

  auto t0 = Clock::now();
  result.metric_plan = run_plan(metric, config.plan, scene);
  if (options.metric_only) {
    result.semantic_plan.status = "skipped";
  } else {
    result.semantic_plan = run_plan(costmap, config.plan, scene);
  }
  result.per_frame.plan_ms = ms_since(t0);

  if (!config.corridors.empty()) {
    const OccupancyGrid inflated =
        inflate_obstacles(costmap, inflation_radius(config.plan.robot_radius, config.resolution),
                          config.plan.lethal_threshold);
    for (const auto& probe : config.corridors) result.corridors.push_back(probe_corridor(probe, inflated, config.plan, scene));
  }

  for (const auto& rec : registry.records()) {
    ObjectResult o;
    o.record = rec;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& obj : scene.objects) {
      if (obj.cls != rec.cls) continue;
      const Point2 c = polygon_centroid(object_footprint(obj));
      const double d = (c - rec.position).norm();
      if (d < best) {
        best = d;
        o.truth_id = obj.id;
        o.position_error = d;
        o.height_error = std::abs(rec.height - obj.shape.slab_top);
      }
    }
    result.objects.push_back(o);
  }

  const double nf = std::max<std::size_t>(n_frames, 1);
  result.per_frame.render_ms = total.render_ms / nf;
  result.per_frame.detect_track_ms = total.detect_track_ms / nf;
  result.per_frame.cloud_plane_ms = total.cloud_plane_ms / nf;
  result.per_frame.scan_map_ms = total.scan_map_ms / nf;

  result.metric = metric;
  result.semantic = semantic;
  result.costmap = costmap;
  result.registry = registry;

  if (write) {
    save_map(metric, semantic, registry, out_dir);
    save_grid(costmap, out_dir, "costmap");
    write_paths_csv(out_dir / "paths.csv", result);
    write_text_file(out_dir / "report.json", report_to_json(result));
    write_text_file(out_dir / "run.log", log.str());
    if (options.trace) write_text_file(out_dir / "tracks.csv", trace.str());
  }
  if (options.export_detections) write_text_file(*options.export_detections, detections_to_json(exported));
  return result;
}

std::string report_to_json(const RunResult& r) {
  json objects = json::array();
  for (const auto& o : r.objects) {
    json j = {{"id", o.record.id},
              {"class", std::string(to_string(o.record.cls))},
              {"x", o.record.position.x()},
              {"y", o.record.position.y()},
              {"height", o.record.height},
              {"count", o.record.observation_count}};
    if (o.truth_id) {
      j["truth_id"] = *o.truth_id;
      j["position_error"] = o.position_error;
      j["height_error"] = o.height_error;
    }
    objects.push_back(std::move(j));
  }
  json corridors = json::array();
  for (const auto& c : r.corridors) {
    corridors.push_back({{"name", c.name}, {"truly_free", c.truly_free}, {"blocked", c.blocked}});
  }
  json dropped = json::object();
  for (const auto& [k, v] : r.dropped) dropped[k] = v;
  json doc = {{"schema", kReportSchemaVersion},
              {"scenario", r.scenario},
              {"seed", r.seed},
              {"frames", r.frames},
              {"metric_only", r.metric_only},
              {"objects", std::move(objects)},
              {"plans", {{"metric", plan_json(r.metric_plan)}, {"semantic", plan_json(r.semantic_plan)}}},
              {"corridors", std::move(corridors)},
              {"dropped", std::move(dropped)},
              {"timings_ms_per_frame",
               {{"render", r.per_frame.render_ms},
                {"detect_track", r.per_frame.detect_track_ms},
                {"cloud_plane", r.per_frame.cloud_plane_ms},
                {"scan_map", r.per_frame.scan_map_ms}}},
              {"plan_ms", r.per_frame.plan_ms}};
  return doc.dump(2) + "\n";
}

std::vector<EvalRow> evaluate_reports(const std::vector<fs::path>& reports) {
  if (reports.empty()) throw Error(ErrorCode::kInvalidArgument, "eval needs at least one report");
  std::vector<EvalRow> rows;
  std::optional<int> schema;
  for (const auto& path : reports) {
    json j;
    try {
      j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
    }
    try {
      const int s = j.at("schema").get<int>();
      if (schema && *schema != s)
        throw Error(ErrorCode::kSchemaVersion, path.string() + ": schema " + std::to_string(s) +
                                                   " differs from earlier reports (" + std::to_string(*schema) + ")");
      if (s != kReportSchemaVersion)
        throw Error(ErrorCode::kSchemaVersion, path.string() + ": unsupported report schema " + std::to_string(s));
      schema = s;

      EvalRow row;
      row.scenario = j.at("scenario").get<std::string>();
      double sum = 0.0;
      for (const auto& o : j.at("objects")) {
        ++row.objects;
        const double pe = o.value("position_error", 0.0);
        sum += pe;
        row.max_position_error = std::max(row.max_position_error, pe);
        row.max_height_error = std::max(row.max_height_error, o.value("height_error", 0.0));
      }
      row.mean_position_error = row.objects ? sum / row.objects : 0.0;
      row.metric_verdict = verdict(j.at("plans").at("metric"));
      row.semantic_verdict = verdict(j.at("plans").at("semantic"));
      for (const auto& c : j.at("corridors")) {
        if (c.at("truly_free").get<bool>() && c.at("blocked").get<bool>()) ++row.false_blockages;
      }
      const auto& t = j.at("timings_ms_per_frame");
      row.detect_track_ms = t.at("detect_track").get<double>();
      row.cloud_plane_ms = t.at("cloud_plane").get<double>();
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
    }
  }
  return rows;
}

std::string eval_table_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream ss;
  ss << "scenario,objects,mean_pos_err_m,max_pos_err_m,max_height_err_m,metric_path,semantic_path,"
        "false_blockages,detect_track_ms,cloud_plane_ms\n";
  for (const auto& r : rows) {
    ss << r.scenario << ',' << r.objects << ',' << fmt(r.mean_position_error) << ',' << fmt(r.max_position_error)
       << ',' << fmt(r.max_height_error) << ',' << r.metric_verdict << ',' << r.semantic_verdict << ','
       << r.false_blockages << ',' << fmt(r.detect_track_ms, 2) << ',' << fmt(r.cloud_plane_ms, 2) << '\n';
  }
  return ss.str();
}

}  // namespace semmap
