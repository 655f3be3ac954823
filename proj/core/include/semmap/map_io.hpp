#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "semmap/grid.hpp"
#include "semmap/semantic.hpp"

namespace semmap {

inline constexpr int kMapSchemaVersion = 1;

/// Binary PGM (P5, maxval 255). The first image row is the grid's top row
/// (largest y), so the file views the right way up.
void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& cells);

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // grid order, row 0 = smallest y
};

/// Throws kIo when unreadable, kFormat on a bad header or short payload.
PgmImage read_pgm(const std::filesystem::path& path);

/// `<stem>.pgm` plus a `<stem>.json` sidecar with geometry and schema.
void save_grid(const OccupancyGrid& grid, const std::filesystem::path& dir, const std::string& stem);
OccupancyGrid load_grid(const std::filesystem::path& dir, const std::string& stem);

/// Sidecar additionally lists [index, owner] for every non-zero cell.
void save_semantic(const SemanticLayer& layer, const std::filesystem::path& dir, const std::string& stem);
SemanticLayer load_semantic(const std::filesystem::path& dir, const std::string& stem);

std::string registry_to_json(const ObjectRegistry& registry);
/// A merge_radius stored in the file wins over the argument.
/// Throws kSchemaVersion for an unknown schema, kFormat for malformed content.
ObjectRegistry parse_registry(std::string_view json_text, double merge_radius = 0.5);

struct MapBundle {
  OccupancyGrid metric;
  SemanticLayer semantic;
  ObjectRegistry registry;
};

/// metric.{pgm,json}, semantic.{pgm,json} and registry.json under dir.
void save_map(const OccupancyGrid& metric, const SemanticLayer& semantic, const ObjectRegistry& registry,
              const std::filesystem::path& dir);
MapBundle load_map(const std::filesystem::path& dir);

/// Whole-file helpers; throw kIo.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace semmap
