#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semmap/cloud.hpp"
#include "semmap/grid.hpp"
#include "semmap/plane.hpp"
#include "semmap/planner.hpp"
#include "semmap/scene.hpp"
#include "semmap/semantic.hpp"
#include "semmap/tracking.hpp"

namespace semmap {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kDetectionsSchemaVersion = 1;

/// Camera looking at `center` from points on a circle around it.
struct Orbit {
  Point2 center = Point2::Zero();
  double radius = 1.5;
  double start_deg = 0.0;
  double sweep_deg = 360.0;
  int points = 12;
};

struct CorridorProbe {
  std::string name;
  Point2 from = Point2::Zero();
  Point2 to = Point2::Zero();
};

struct ScenarioConfig {
  std::string name;
  std::filesystem::path scene_path;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  CameraModel camera;
  double mount_height = 0.3;
  double mount_forward = 0.0;
  double depth_noise = 0.0;

  std::vector<RobotPose2D> waypoints;  // orbit entries already expanded
  double speed = 0.5;
  double dt = 0.2;
  PoseNoise pose_noise;

  int min_pixels = 50;
  // Detections touching the image border are not used to position objects.
  bool skip_truncated = true;
  std::optional<std::filesystem::path> external_detections;

  TrackerParams tracker;
  BackgroundParams background;
  ClusterParams cluster;
  RansacParams ransac;

  double resolution = 0.05;
  double sigma = 0.15;
  double merge_radius = 0.5;
  int scan_band = 2;
  LogOddsParams log_odds;

  PlanRequest plan;
  std::vector<CorridorProbe> corridors;
};

/// Parses a schema-versioned config. Relative paths resolve against base_dir.
/// Every problem is reported as kConfig.
ScenarioConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  bool metric_only = false;
  bool trace = false;
  bool dump_clouds = false;
  std::optional<std::filesystem::path> export_detections;
  int workers = 0;  // 0: hardware concurrency
};

struct ObjectResult {
  ObjectRecord record;
  std::optional<int> truth_id;
  double position_error = 0.0;
  double height_error = 0.0;
};

struct PlanResult {
  std::string status = "not_run";  // ok, no_path, start_or_goal_lethal, skipped
  Path path;
  CollisionReport collision;
};

struct CorridorResult {
  std::string name;
  bool truly_free = false;
  bool blocked = false;
};

struct StageTimings {
  double render_ms = 0.0;
  double detect_track_ms = 0.0;
  double cloud_plane_ms = 0.0;
  double scan_map_ms = 0.0;
  double plan_ms = 0.0;  // both plans, whole run
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t frames = 0;
  bool metric_only = false;
  std::vector<ObjectResult> objects;
  PlanResult metric_plan;
  PlanResult semantic_plan;
  std::vector<CorridorResult> corridors;
  StageTimings per_frame;
  std::map<std::string, int> dropped;  // error code -> count of skipped track observations

  OccupancyGrid metric;
  SemanticLayer semantic;
  OccupancyGrid costmap;
  ObjectRegistry registry;
};

/// Runs the whole scenario and, when options or config name an output
/// directory, writes its artifacts there.
RunResult run_pipeline(const ScenarioConfig& config, const RunOptions& options = {});

/// Per-frame detections in the external exchange format.
using FrameDetections = std::vector<std::vector<Detection>>;
std::string detections_to_json(const FrameDetections& frames);
/// Throws kFormat / kSchemaVersion.
FrameDetections parse_detections(std::string_view json_text);

std::string report_to_json(const RunResult& result);

struct EvalRow {
  std::string scenario;
  std::size_t objects = 0;
  double mean_position_error = 0.0;
  double max_position_error = 0.0;
  double max_height_error = 0.0;
  std::string metric_verdict;
  std::string semantic_verdict;
  int false_blockages = 0;
  double detect_track_ms = 0.0;
  double cloud_plane_ms = 0.0;
};

/// One row per report. Throws kInvalidArgument for an empty list,
/// kSchemaVersion when reports disagree on (or use an unknown) schema.
std::vector<EvalRow> evaluate_reports(const std::vector<std::filesystem::path>& reports);
std::string eval_table_csv(const std::vector<EvalRow>& rows);

}  // namespace semmap
