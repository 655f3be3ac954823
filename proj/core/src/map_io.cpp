#include "semmap/map_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semmap/error.hpp"

namespace semmap {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_schema(const json& j, const std::string& what) {
  if (!j.contains("schema")) throw Error(ErrorCode::kFormat, what + ": missing schema field");
  const int schema = j.at("schema").get<int>();
  if (schema != kMapSchemaVersion)
    throw Error(ErrorCode::kSchemaVersion,
                what + ": schema " + std::to_string(schema) + " (supported: " + std::to_string(kMapSchemaVersion) + ")");
}

json geometry_json(const GridGeometry& g) {
  return {{"resolution", g.resolution},
          {"origin", {g.origin.x(), g.origin.y()}},
          {"width", g.width},
          {"height", g.height}};
}

GridGeometry geometry_from(const json& j) {
  GridGeometry g;
  g.resolution = j.at("resolution").get<double>();
  g.origin = Point2(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>());
  g.width = j.at("width").get<int>();
  g.height = j.at("height").get<int>();
  if (!(g.resolution > 0.0) || g.width <= 0 || g.height <= 0) throw Error(ErrorCode::kFormat, "bad grid geometry");
  return g;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, what + ": " + e.what());
  }
}

// Wraps nlohmann type/key errors into kFormat.
template <typename F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, what + ": " + e.what());
  }
}

std::vector<std::uint8_t> pgm_cells(const PgmImage& img, const GridGeometry& g, const std::string& what) {
  if (img.width != g.width || img.height != g.height)
    throw Error(ErrorCode::kFormat, what + ": image size does not match sidecar");
  return img.cells;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_pgm(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& cells) {
  if (width <= 0 || height <= 0 || cells.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorCode::kInvalidArgument, "pgm size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (int row = height - 1; row >= 0; --row) {
    out.write(reinterpret_cast<const char*>(cells.data() + static_cast<std::size_t>(row) * width), width);
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

PgmImage read_pgm(const fs::path& path) {
  const std::string data = read_text_file(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw Error(ErrorCode::kFormat, path.string() + ": malformed PGM header");
    return std::stol(data.substr(start, pos - start));
  };

  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw Error(ErrorCode::kFormat, path.string() + ": not a binary PGM (bad magic)");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0 || maxval != 255) throw Error(ErrorCode::kFormat, path.string() + ": unsupported PGM header");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw Error(ErrorCode::kFormat, path.string() + ": malformed PGM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos != n) throw Error(ErrorCode::kFormat, path.string() + ": payload size mismatch");

  PgmImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.cells.resize(n);
  for (long row = 0; row < h; ++row) {
    const char* src = data.data() + pos + static_cast<std::size_t>(h - 1 - row) * w;
    std::copy(src, src + w, img.cells.begin() + static_cast<std::ptrdiff_t>(row * w));
  }
  return img;
}

void save_grid(const OccupancyGrid& grid, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  write_pgm(dir / (stem + ".pgm"), grid.geometry().width, grid.geometry().height, grid.values());
  json side = geometry_json(grid.geometry());
  side["schema"] = kMapSchemaVersion;
  side["image"] = stem + ".pgm";
  const LogOddsParams& p = grid.params();
  side["log_odds"] = {{"occupied", p.l_occ}, {"free", p.l_free}, {"min", p.l_min}, {"max", p.l_max}};
  write_text_file(dir / (stem + ".json"), side.dump(2) + "\n");
}

OccupancyGrid load_grid(const fs::path& dir, const std::string& stem) {
  const std::string what = (dir / (stem + ".json")).string();
  const json side = parse_json(read_text_file(dir / (stem + ".json")), what);
  return guarded(what, [&] {
    check_schema(side, what);
    const GridGeometry g = geometry_from(side);
    LogOddsParams p;
    if (side.contains("log_odds")) {
      const json& l = side.at("log_odds");
      p.l_occ = l.at("occupied").get<double>();
      p.l_free = l.at("free").get<double>();
      p.l_min = l.at("min").get<double>();
      p.l_max = l.at("max").get<double>();
    }
    const PgmImage img = read_pgm(dir / side.value("image", stem + ".pgm"));
    return OccupancyGrid::from_values(g, pgm_cells(img, g, what), p);
  });
}

void save_semantic(const SemanticLayer& layer, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  const GridGeometry& g = layer.geometry();
  write_pgm(dir / (stem + ".pgm"), g.width, g.height, layer.values());
  json side = geometry_json(g);
  side["schema"] = kMapSchemaVersion;
  side["image"] = stem + ".pgm";
  json owners = json::array();
  for (std::size_t i = 0; i < layer.owners().size(); ++i) {
    if (layer.owners()[i] != SemanticLayer::kNoOwner) owners.push_back({i, layer.owners()[i]});
  }
  side["owners"] = std::move(owners);
  write_text_file(dir / (stem + ".json"), side.dump() + "\n");
}

SemanticLayer load_semantic(const fs::path& dir, const std::string& stem) {
  const std::string what = (dir / (stem + ".json")).string();
  const json side = parse_json(read_text_file(dir / (stem + ".json")), what);
  return guarded(what, [&] {
    check_schema(side, what);
    const GridGeometry g = geometry_from(side);
    const PgmImage img = read_pgm(dir / side.value("image", stem + ".pgm"));
    const std::vector<std::uint8_t> values = pgm_cells(img, g, what);
    std::vector<int> owners(g.size(), SemanticLayer::kNoOwner);
    for (const auto& entry : side.at("owners")) {
      const auto index = entry.at(0).get<std::size_t>();
      if (index >= g.size()) throw Error(ErrorCode::kFormat, what + ": owner index out of range");
      owners[index] = entry.at(1).get<int>();
    }
    SemanticLayer layer(g);
    for (std::size_t i = 0; i < values.size(); ++i) layer.assign(i, values[i], owners[i]);
    return layer;
  });
}

std::string registry_to_json(const ObjectRegistry& registry) {
  json objects = json::array();
  for (const auto& r : registry.records()) {
    json fp = json::array();
    for (const auto& v : r.footprint) fp.push_back({v.x(), v.y()});
    objects.push_back({{"id", r.id},
                       {"class", std::string(to_string(r.cls))},
                       {"x", r.position.x()},
                       {"y", r.position.y()},
                       {"height", r.height},
                       {"footprint", std::move(fp)},
                       {"count", r.observation_count},
                       {"confidence", r.confidence}});
  }
  json doc = {{"schema", kMapSchemaVersion}, {"merge_radius", registry.merge_radius()}, {"objects", std::move(objects)}};
  return doc.dump(2) + "\n";
}

ObjectRegistry parse_registry(std::string_view json_text, double merge_radius) {
  const json doc = parse_json(std::string(json_text), "registry");
  return guarded("registry", [&] {
    check_schema(doc, "registry");
    std::vector<ObjectRecord> records;
    for (const auto& o : doc.at("objects")) {
      ObjectRecord r;
      r.id = o.at("id").get<int>();
      r.cls = parse_object_class(o.at("class").get<std::string>());
      r.position = Point2(o.at("x").get<double>(), o.at("y").get<double>());
      r.height = o.at("height").get<double>();
      for (const auto& v : o.at("footprint")) r.footprint.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      r.observation_count = o.at("count").get<int>();
      r.confidence = o.at("confidence").get<double>();
      if (r.footprint.empty() || r.observation_count < 1)
        throw Error(ErrorCode::kFormat, "registry: record " + std::to_string(r.id) + " is invalid");
      records.push_back(std::move(r));
    }
    const double radius = doc.contains("merge_radius") ? doc.at("merge_radius").get<double>() : merge_radius;
    return ObjectRegistry::from_records(std::move(records), radius);
  });
}

void save_map(const OccupancyGrid& metric, const SemanticLayer& semantic, const ObjectRegistry& registry,
              const fs::path& dir) {
  if (!(metric.geometry() == semantic.geometry()))
    throw Error(ErrorCode::kGeometryMismatch, "metric and semantic grids differ");
  save_grid(metric, dir, "metric");
  save_semantic(semantic, dir, "semantic");
  write_text_file(dir / "registry.json", registry_to_json(registry));
}

MapBundle load_map(const fs::path& dir) {
  MapBundle b;
  b.metric = load_grid(dir, "metric");
  b.semantic = load_semantic(dir, "semantic");
  if (!(b.metric.geometry() == b.semantic.geometry()))
    throw Error(ErrorCode::kGeometryMismatch, "metric and semantic grids differ");
  b.registry = parse_registry(read_text_file(dir / "registry.json"));
  return b;
}

}  // namespace semmap
