#include "semmap/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semmap/error.hpp"

namespace semmap {

ObjectRegistry::ObjectRegistry(double merge_radius) : merge_radius_(merge_radius) {
  if (!(merge_radius >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "merge radius must be >= 0");
}

int ObjectRegistry::register_object(const ObjectObservation& obs) {
  if (obs.footprint.empty()) throw Error(ErrorCode::kInvalidArgument, "observation without footprint");

  ObjectRecord* target = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (auto& rec : records_) {
    if (rec.cls != obs.cls) continue;
    const double d = (rec.position - obs.position).norm();
    if (d <= merge_radius_ && d < best) {
      best = d;
      target = &rec;
    }
  }

  if (!target) {
    ObjectRecord rec;
    rec.id = next_id_++;
    rec.cls = obs.cls;
    rec.position = obs.position;
    rec.height = obs.height;
    rec.footprint = convex_hull(obs.footprint);
    if (rec.footprint.empty()) rec.footprint = obs.footprint;
    rec.observation_count = 1;
    rec.confidence = obs.confidence;
    records_.push_back(std::move(rec));
    return records_.back().id;
  }

  ObjectRecord& rec = *target;
  double w_old = rec.confidence * rec.observation_count;
  double w_new = obs.confidence;
  if (!(w_old + w_new > 0.0)) {
    w_old = rec.observation_count;
    w_new = 1.0;
  }
  const double total = w_old + w_new;
  rec.position = (w_old * rec.position + w_new * obs.position) / total;
  rec.height = (w_old * rec.height + w_new * obs.height) / total;

  Polygon2 merged = rec.footprint;
  merged.insert(merged.end(), obs.footprint.begin(), obs.footprint.end());
  Polygon2 hull = convex_hull(merged);
  if (hull.size() >= 3) rec.footprint = std::move(hull);

  rec.confidence = (rec.confidence * rec.observation_count + obs.confidence) / (rec.observation_count + 1);
  ++rec.observation_count;
  return rec.id;
}

const ObjectRecord* ObjectRegistry::find(int id) const {
  for (const auto& rec : records_) {
    if (rec.id == id) return &rec;
  }
  return nullptr;
}

ObjectRegistry ObjectRegistry::from_records(std::vector<ObjectRecord> records, double merge_radius) {
  ObjectRegistry reg(merge_radius);
  for (const auto& r : records) reg.next_id_ = std::max(reg.next_id_, r.id + 1);
  reg.records_ = std::move(records);
  return reg;
}

SemanticLayer::SemanticLayer(const GridGeometry& geometry)
    : geometry_(geometry), values_(geometry.size(), 0), owners_(geometry.size(), kNoOwner) {}

bool SemanticLayer::raise(std::size_t index, std::uint8_t value, int owner) {
  if (value <= values_[index]) return false;
  values_[index] = value;
  owners_[index] = owner;
  return true;
}

void SemanticLayer::assign(std::size_t index, std::uint8_t value, int owner) {
  if ((value > 0) != (owner != kNoOwner))
    throw Error(ErrorCode::kFormat, "semantic cell value and owner disagree");
  values_[index] = value;
  owners_[index] = owner;
}

void stamp_semantic_footprint(SemanticLayer& layer, const ObjectRecord& record, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  if (record.footprint.empty()) throw Error(ErrorCode::kInvalidArgument, "record without footprint");
  const GridGeometry& g = layer.geometry();
  const double reach = 3.0 * sigma;
  const Box2 box = bounding_box(record.footprint);
  const Cell lo = g.cell_of(box.min - Point2(reach, reach));
  const Cell hi = g.cell_of(box.max + Point2(reach, reach));
  const int x0 = std::max(lo.x, 0), y0 = std::max(lo.y, 0);
  const int x1 = std::min(hi.x, g.width - 1), y1 = std::min(hi.y, g.height - 1);
  if (x0 > x1 || y0 > y1) throw Error(ErrorCode::kFootprintOutsideGrid, "footprint does not overlap the grid");

  const bool area = record.footprint.size() >= 3;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Cell c{x, y};
      const Point2 p = g.center(c);
      std::uint8_t v = 0;
      if (area && convex_contains(record.footprint, p, 0.0)) {
        v = 255;
      } else {
        const double d = distance_to_convex(record.footprint, p);
        if (d > reach) continue;
        v = static_cast<std::uint8_t>(std::lround(255.0 * std::exp(-d * d / (2.0 * sigma * sigma))));
      }
      layer.raise(g.index(c), v, record.id);
    }
  }
}

SemanticLayer build_semantic_layer(const GridGeometry& geometry, std::span<const ObjectRecord> records,
                                   double sigma) {
  SemanticLayer layer(geometry);
  for (const auto& rec : records) stamp_semantic_footprint(layer, rec, sigma);
  return layer;
}

OccupancyGrid compose_costmap(const OccupancyGrid& metric, const SemanticLayer& semantic) {
  if (!(metric.geometry() == semantic.geometry()))
    throw Error(ErrorCode::kGeometryMismatch, "metric and semantic grids differ");
  std::vector<std::uint8_t> values(metric.values());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::max(values[i], semantic.values()[i]);
  return OccupancyGrid::from_values(metric.geometry(), std::move(values), metric.params());
}

}  // namespace semmap
