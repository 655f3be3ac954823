#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semmap/grid.hpp"
#include "semmap/polygon.hpp"
#include "semmap/scene.hpp"

namespace semmap {

/// One processed sighting of an object, in map frame.
struct ObjectObservation {
  ObjectClass cls = ObjectClass::kChair;
  Point2 position = Point2::Zero();
  Polygon2 footprint;
  double height = 0.0;
  double confidence = 1.0;
};

struct ObjectRecord {
  int id = 0;
  ObjectClass cls = ObjectClass::kChair;
  Point2 position = Point2::Zero();
  double height = 0.0;
  Polygon2 footprint;
  int observation_count = 1;
  // Mean confidence of the merged observations.
  double confidence = 1.0;

  bool operator==(const ObjectRecord&) const = default;
};

/// Object-level map. An observation merges into the nearest same-class record
/// within merge_radius: position and height by confidence-weighted mean,
/// footprint by the hull of both footprints. Otherwise it opens a new record.
class ObjectRegistry {
 public:
  explicit ObjectRegistry(double merge_radius = 0.5);

  /// Returns the id of the record the observation ended up in.
  int register_object(const ObjectObservation& observation);

  const std::vector<ObjectRecord>& records() const { return records_; }
  const ObjectRecord* find(int id) const;
  double merge_radius() const { return merge_radius_; }
  bool empty() const { return records_.empty(); }

  /// Rebuilds a registry from stored records; new ids continue after the largest.
  static ObjectRegistry from_records(std::vector<ObjectRecord> records, double merge_radius = 0.5);

  bool operator==(const ObjectRegistry& other) const { return records_ == other.records_; }

 private:
  double merge_radius_;
  std::vector<ObjectRecord> records_;
  int next_id_ = 1;
};

/// Per-cell semantic occupancy (0-255) with the id of the object that set it.
class SemanticLayer {
 public:
  static constexpr int kNoOwner = 0;

  SemanticLayer() = default;
  explicit SemanticLayer(const GridGeometry& geometry);

  const GridGeometry& geometry() const { return geometry_; }
  const std::vector<std::uint8_t>& values() const { return values_; }
  const std::vector<int>& owners() const { return owners_; }
  std::uint8_t value(Cell c) const { return values_[geometry_.index(c)]; }
  int owner(Cell c) const { return owners_[geometry_.index(c)]; }

  /// Raises a cell to `value` (and records the owner) if that is an increase.
  bool raise(std::size_t index, std::uint8_t value, int owner);
  /// Direct write used when loading from disk; value > 0 requires an owner.
  void assign(std::size_t index, std::uint8_t value, int owner);

  bool operator==(const SemanticLayer&) const = default;

 private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> values_;
  std::vector<int> owners_;
};

/// Cells whose centre lies in the footprint become 255. Cells outside but
/// within 3 sigma rise to round(255 exp(-d^2 / 2 sigma^2)), d the distance to
/// the footprint. Throws kFootprintOutsideGrid when nothing overlaps the grid.
void stamp_semantic_footprint(SemanticLayer& layer, const ObjectRecord& record, double sigma);

/// Clears the layer and stamps every record.
SemanticLayer build_semantic_layer(const GridGeometry& geometry, std::span<const ObjectRecord> records,
                                   double sigma);

/// Per-cell max of metric occupancy and semantic value. Throws kGeometryMismatch.
OccupancyGrid compose_costmap(const OccupancyGrid& metric, const SemanticLayer& semantic);

}  // namespace semmap
