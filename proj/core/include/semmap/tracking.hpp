#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semmap/scene.hpp"

namespace semmap {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity box state (x, y, w, h, vx, vy, vw, vh), pixels and
/// pixels per frame.
struct TrackState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();

  BBox bbox() const { return {mean[0], mean[1], mean[2], mean[3]}; }
};

struct Measurement {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  static Measurement from(const BBox& b) { return {b.x, b.y, b.w, b.h}; }
};

// Standard deviations proportional to the current box size.
struct ProcessNoise {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
};

struct MeasurementNoise {
  double sigma_px = 2.0;
};

TrackState kf_initiate(const Measurement& z, const ProcessNoise& q = {});

/// Advances dt_frames (>= 1) steps; P -> F P F^T + dt * Q.
TrackState kf_predict(const TrackState& state, int dt_frames, const ProcessNoise& q = {});

struct KfUpdateResult {
  TrackState state;
  // Set when the posterior width or height dropped to <= 0 and was clamped to 1 px.
  bool size_clamped = false;
};

/// Kalman update observing (x, y, w, h); Joseph-form covariance, symmetrised.
KfUpdateResult kf_update(const TrackState& state, const Measurement& z, const MeasurementNoise& r = {});

double iou(const BBox& a, const BBox& b);

/// Maximum-weight assignment on a rectangular matrix of non-negative weights.
/// Returns, per row, the assigned column or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weights);

enum class TrackStatus { kTentative, kConfirmed, kDeleted };

struct Track {
  int track_id = 0;
  TrackState state;
  ObjectClass cls = ObjectClass::kChair;
  TrackStatus status = TrackStatus::kTentative;
  int hits = 0;
  int misses = 0;
  // Detection matched in the most recent step, if any.
  std::optional<Detection> detection;
};

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, detection)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Total-IoU-optimal matching between same-class pairs whose IoU >= iou_min.
/// Track boxes are taken from the (predicted) state mean.
Association associate(std::span<const Track> tracks, std::span<const Detection> detections, double iou_min);

struct TrackerParams {
  int n_init = 3;
  int max_age = 5;
  double iou_min = 0.3;
  ProcessNoise process;
  MeasurementNoise measurement;
};

class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  /// predict -> associate -> update -> spawn -> confirm/delete. Returns the
  /// confirmed tracks alive after this frame. Frame indices must increase.
  std::vector<Track> step(std::span<const Detection> detections, long frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }

 private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<long> last_frame_;
};

}  // namespace semmap
