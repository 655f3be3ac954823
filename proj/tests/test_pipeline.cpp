#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "semmap/error.hpp"
#include "semmap/map_io.hpp"
#include "semmap/pipeline.hpp"

using namespace semmap;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SEMMAP_FIXTURES_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semmap_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

std::string small_config_text() { return read_text_file(kFixtures / "small.json"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Config, ParsesFixture) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  EXPECT_EQ(c.name, "small");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.waypoints.size(), 8u);
  EXPECT_NEAR(c.waypoints[0].x, 2.5 + 1.9 * std::cos(200 * std::numbers::pi / 180), 1e-12);
  EXPECT_DOUBLE_EQ(c.mount_height, 0.15);
  EXPECT_DOUBLE_EQ(c.ransac.min_normal_z, 0.7);
  EXPECT_DOUBLE_EQ(c.plan.robot_radius, 0.15);
  EXPECT_FALSE(c.external_detections.has_value());
}

TEST(Config, ErrorsAreConfigErrors) {
  const std::string ok = small_config_text();
  auto code = [&](const std::string& text) { return code_of([&] { parse_config(text, kFixtures); }); };
  EXPECT_EQ(code("{"), ErrorCode::kConfig);
  EXPECT_EQ(code("[1, 2]"), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "\"schema\": 1", "\"schema\": 2")), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "small.scene.json", "missing.scene.json")), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "\"seed\": 7,", "")), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "\"speed\": 0.5", "\"speed\": -1")), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "\"robot_radius\": 0.15", "\"robot_radius\": \"wide\"")), ErrorCode::kConfig);
  EXPECT_EQ(code(replace(ok, "\"points\": 8", "\"points\": 0")), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { load_config(kFixtures / "nope.json"); }), ErrorCode::kConfig);
}

TEST(Config, MissingSceneNamesThePath) {
  try {
    parse_config(replace(small_config_text(), "small.scene.json", "absent.scene.json"), kFixtures);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absent.scene.json"), std::string::npos);
  }
}

TEST(Pipeline, SmallSceneMapsTheDesk) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  const RunResult r = run_pipeline(c);
  EXPECT_EQ(r.frames, 48u);
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].record.cls, ObjectClass::kDesk);
  EXPECT_EQ(r.objects[0].truth_id, 1);
  EXPECT_LE(r.objects[0].position_error, 0.10);
  EXPECT_LE(r.objects[0].height_error, 0.05);
  EXPECT_EQ(r.semantic_plan.status, "ok");
  EXPECT_FALSE(r.semantic_plan.collision.collided);
}

TEST(Pipeline, DeterministicAcrossRunsAndWorkerCounts) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  RunOptions a, b;
  a.output_dir = scratch("det_a");
  a.workers = 1;
  b.output_dir = scratch("det_b");
  b.workers = 3;
  run_pipeline(c, a);
  run_pipeline(c, b);
  for (const char* f : {"registry.json", "metric.pgm", "semantic.pgm", "costmap.pgm", "paths.csv"}) {
    EXPECT_EQ(read_text_file(*a.output_dir / f), read_text_file(*b.output_dir / f)) << f;
  }
}

TEST(Pipeline, SeedOverrideChangesNoisyRuns) {
  ScenarioConfig c = load_config(kFixtures / "small.json");
  c.depth_noise = 0.01;
  RunOptions o1, o2;
  o1.seed = 1;
  o2.seed = 2;
  const RunResult r1 = run_pipeline(c, o1), r2 = run_pipeline(c, o2);
  EXPECT_EQ(r1.seed, 1u);
  ASSERT_FALSE(r1.registry.empty());
  ASSERT_FALSE(r2.registry.empty());
  EXPECT_NE(r1.registry.records()[0].position, r2.registry.records()[0].position);
}

TEST(Pipeline, MetricOnlyLeavesTheMetricGridAlone) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  RunOptions metric_only;
  metric_only.metric_only = true;
  const RunResult full = run_pipeline(c), metric = run_pipeline(c, metric_only);
  EXPECT_EQ(full.metric.values(), metric.metric.values());
  EXPECT_EQ(metric.semantic_plan.status, "skipped");
  EXPECT_EQ(metric.costmap.values(), metric.metric.values());
  for (auto v : metric.semantic.values()) ASSERT_EQ(v, 0);
}

TEST(Pipeline, WritesArtifacts) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  RunOptions o;
  o.output_dir = scratch("artifacts");
  o.trace = true;
  o.dump_clouds = true;
  run_pipeline(c, o);
  for (const char* f : {"metric.pgm", "metric.json", "semantic.pgm", "semantic.json", "costmap.pgm", "registry.json",
                        "paths.csv", "report.json", "run.log", "tracks.csv"}) {
    EXPECT_TRUE(fs::exists(*o.output_dir / f)) << f;
  }
  EXPECT_FALSE(fs::is_empty(*o.output_dir / "clouds"));
  const MapBundle m = load_map(*o.output_dir);
  EXPECT_EQ(m.registry.records().size(), 1u);
}

TEST(ExternalDetections, FixtureIsConsumed) {
  const FrameDetections frames = parse_detections(read_text_file(kFixtures / "small_detections.json"));
  ASSERT_EQ(frames.size(), 48u);
  for (const auto& f : frames) {
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].cls, ObjectClass::kDesk);
    EXPECT_DOUBLE_EQ(f[0].confidence, 0.85);
  }
  const RunResult r = run_pipeline(load_config(kFixtures / "small_external.json"));
  ASSERT_EQ(r.registry.records().size(), 1u);
  EXPECT_NEAR(r.registry.records()[0].confidence, 0.85, 1e-9);
  EXPECT_LE(r.objects[0].position_error, 0.10);
}

TEST(ExternalDetections, RoundTripAndErrors) {
  FrameDetections frames(3);
  frames[0].push_back({{10.5, 20, 30, 40}, ObjectClass::kSofa, 0.5});
  frames[2].push_back({{1, 2, 3, 4}, ObjectClass::kWhiteboard, 1.0});
  const FrameDetections back = parse_detections(detections_to_json(frames));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(back[1].empty());
  EXPECT_EQ(back[0][0].cls, ObjectClass::kSofa);
  EXPECT_DOUBLE_EQ(back[0][0].bbox.x, 10.5);
  EXPECT_EQ(code_of([] { parse_detections(R"({"schema": 5, "frames": []})"); }), ErrorCode::kSchemaVersion);
  EXPECT_EQ(code_of([] { parse_detections(R"({"schema": 1, "frames": [{"frame": 0, "detections": [{"class": "lamp",
            "bbox": [1, 1, 1, 1], "confidence": 1}]}]})"); }),
            ErrorCode::kFormat);
}

TEST(Eval, OneRowPerReport) {
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  RunOptions o;
  o.output_dir = scratch("eval");
  run_pipeline(c, o);
  const auto rows = evaluate_reports({*o.output_dir / "report.json"});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].scenario, "small");
  EXPECT_EQ(rows[0].objects, 1u);
  EXPECT_EQ(rows[0].semantic_verdict, "FREE");
  const std::string csv = eval_table_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Eval, RejectsEmptyAndMixedSchemas) {
  EXPECT_EQ(code_of([] { evaluate_reports({}); }), ErrorCode::kInvalidArgument);
  const ScenarioConfig c = load_config(kFixtures / "small.json");
  RunOptions o;
  o.output_dir = scratch("eval_mixed");
  run_pipeline(c, o);
  const fs::path a = *o.output_dir / "report.json", b = *o.output_dir / "report_v2.json";
  write_text_file(b, replace(read_text_file(a), "\"schema\": 1", "\"schema\": 2"));
  EXPECT_EQ(evaluate_reports({a, a}).size(), 2u);
  EXPECT_EQ(code_of([&] { evaluate_reports({a, b}); }), ErrorCode::kSchemaVersion);
  EXPECT_EQ(code_of([&] { evaluate_reports({b}); }), ErrorCode::kSchemaVersion);
}
