// semmap: scenario runner, report aggregation and map rendering.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semmap/error.hpp"
#include "semmap/map_io.hpp"
#include "semmap/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Rgb {
  std::uint8_t r, g, b;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> px;
  Rgb& at(int x, int y) { return px[static_cast<std::size_t>(y) * width + x]; }
};

// Reads paths.csv ("path,index,x,y") into named polylines.
std::vector<std::pair<std::string, std::vector<semmap::Point2>>> read_paths(const fs::path& file) {
  std::vector<std::pair<std::string, std::vector<semmap::Point2>>> out;
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, idx, x, y;
    if (!std::getline(ss, name, ',') || !std::getline(ss, idx, ',') || !std::getline(ss, x, ',') ||
        !std::getline(ss, y, ','))
      continue;
    if (out.empty() || out.back().first != name) out.push_back({name, {}});
    out.back().second.emplace_back(std::stod(x), std::stod(y));
  }
  return out;
}

int render_map(const fs::path& map, const fs::path& image, int scale) {
  fs::path dir = map;
  std::string stem = "costmap";
  if (!fs::is_directory(map)) {
    dir = map.parent_path();
    stem = map.stem().string();
  } else if (!fs::exists(dir / "costmap.pgm")) {
    stem = "metric";
  }
  const semmap::OccupancyGrid grid = semmap::load_grid(dir, stem);
  const auto& g = grid.geometry();

  std::optional<semmap::SemanticLayer> semantic;
  if (fs::exists(dir / "semantic.json")) semantic = semmap::load_semantic(dir, "semantic");

  Image img;
  img.width = g.width * scale;
  img.height = g.height * scale;
  img.px.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int cy = 0; cy < g.height; ++cy) {
    for (int cx = 0; cx < g.width; ++cx) {
      const std::uint8_t v = grid.value({cx, cy});
      const auto shade = static_cast<std::uint8_t>(255 - v);
      Rgb c{shade, shade, shade};
      if (semantic && semantic->value({cx, cy}) > 0 && semantic->value({cx, cy}) >= v) {
        const std::uint8_t s = semantic->value({cx, cy});
        c = {255, static_cast<std::uint8_t>(255 - s), static_cast<std::uint8_t>(255 - s)};
      }
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) img.at(cx * scale + dx, (g.height - 1 - cy) * scale + dy) = c;
      }
    }
  }

  if (fs::exists(dir / "paths.csv")) {
    for (const auto& [name, pts] : read_paths(dir / "paths.csv")) {
      const Rgb colour = name == "metric" ? Rgb{30, 90, 230} : Rgb{20, 170, 60};
      for (const auto& p : pts) {
        const semmap::Cell c = g.cell_of(p);
        if (!g.contains(c)) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) img.at(c.x * scale + dx, (g.height - 1 - c.y) * scale + dy) = colour;
        }
      }
    }
  }

  std::ofstream out(image, std::ios::binary);
  if (!out) throw semmap::Error(semmap::ErrorCode::kIo, "cannot write " + image.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.px.data()), static_cast<std::streamsize>(img.px.size() * 3));
  return kExitOk;
}

int run(const fs::path& config_path, const semmap::RunOptions& options) {
  const semmap::ScenarioConfig config = semmap::load_config(config_path);
  const semmap::RunResult r = semmap::run_pipeline(config, options);
  const fs::path out = options.output_dir.value_or(config.output_dir);

  std::cout << "scenario " << r.scenario << ": " << r.frames << " frames, " << r.objects.size() << " objects\n";
  for (const auto& o : r.objects) {
    std::cout << "  object " << o.record.id << " " << semmap::to_string(o.record.cls) << " at ("
              << o.record.position.x() << ", " << o.record.position.y() << ") height " << o.record.height
              << " seen " << o.record.observation_count << "x";
    if (o.truth_id) std::cout << ", position error " << o.position_error << " m";
    std::cout << '\n';
  }
  auto show = [](const char* name, const semmap::PlanResult& p) {
    std::cout << "  " << name << " path: " << p.status;
    if (p.status == "ok") std::cout << (p.collision.collided ? ", COLLIDING" : ", collision-free");
    std::cout << '\n';
  };
  show("metric", r.metric_plan);
  show("semantic", r.semantic_plan);
  if (!out.empty()) std::cout << "artifacts in " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic costmap mapping and planning for hollow-bottom obstacles"};
  app.require_subcommand(1);

  semmap::RunOptions run_opts;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string export_path;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario config end to end");
  run_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
  auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_flag("--metric-only", run_opts.metric_only, "Skip the semantic stages");
  run_cmd->add_flag("--trace", run_opts.trace, "Write per-frame track trace (tracks.csv)");
  run_cmd->add_flag("--dump-clouds", run_opts.dump_clouds, "Write per-track object clouds (clouds/*.xyz)");
  auto* export_opt =
      run_cmd->add_option("--export-detections", export_path, "Write the detector output as detection JSON");
  run_cmd->add_option("--workers", run_opts.workers, "Frames prepared concurrently (0: all cores)");

  std::vector<std::string> reports;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate run reports into a table");
  eval_cmd->add_option("reports", reports, "report.json files");
  eval_cmd->add_option("-o,--output", eval_out, "Also write the table as CSV");

  std::string map_path;
  std::string image_path;
  int scale = 4;
  auto* render_cmd = app.add_subcommand("render-map", "Render a saved map (and its paths) to a PPM image");
  render_cmd->add_option("map", map_path, "Map directory or grid .pgm")->required();
  render_cmd->add_option("-o,--output", image_path, "Output image (.ppm)")->required();
  render_cmd->add_option("--scale", scale, "Pixels per cell")->check(CLI::Range(1, 32));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) {
      if (*seed_opt) run_opts.seed = seed;
      if (*out_opt) run_opts.output_dir = out_dir;
      if (*export_opt) run_opts.export_detections = export_path;
      return run(config_path, run_opts);
    }
    if (*eval_cmd) {
      if (reports.empty()) {
        std::cerr << "eval: at least one report is required\n" << eval_cmd->help();
        return kExitConfig;
      }
      std::vector<fs::path> paths(reports.begin(), reports.end());
      const std::string table = semmap::eval_table_csv(semmap::evaluate_reports(paths));
      std::cout << table;
      if (!eval_out.empty()) semmap::write_text_file(eval_out, table);
      return kExitOk;
    }
    if (*render_cmd) return render_map(map_path, image_path, scale);
  } catch (const semmap::Error& e) {
    std::cerr << "semmap: " << e.what() << '\n';
    return e.code() == semmap::ErrorCode::kConfig ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "semmap: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
