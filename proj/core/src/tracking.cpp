#include "semmap/tracking.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Dense>

#include "semmap/error.hpp"

namespace semmap {

namespace {

using Matrix4 = Eigen::Matrix4d;
using Matrix48 = Eigen::Matrix<double, 4, 8>;

Matrix48 observation_matrix() {
  Matrix48 h = Matrix48::Zero();
  h.leftCols<4>().setIdentity();
  return h;
}

StateCovariance transition(int dt) {
  StateCovariance f = StateCovariance::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = dt;
  return f;
}

StateVector size_scaled_std(double w, double h, double pos_weight, double vel_weight) {
  StateVector s;
  s << pos_weight * w, pos_weight * h, pos_weight * w, pos_weight * h, vel_weight * w, vel_weight * h,
      vel_weight * w, vel_weight * h;
  return s;
}

}  // namespace

TrackState kf_initiate(const Measurement& z, const ProcessNoise& q) {
  TrackState s;
  s.mean << z.x, z.y, z.w, z.h, 0.0, 0.0, 0.0, 0.0;
  const StateVector std_dev =
      size_scaled_std(z.w, z.h, 2.0 * q.std_weight_position, 10.0 * q.std_weight_velocity);
  s.covariance = std_dev.cwiseAbs2().asDiagonal();
  return s;
}

TrackState kf_predict(const TrackState& state, int dt_frames, const ProcessNoise& q) {
  if (dt_frames < 1) throw Error(ErrorCode::kInvalidArgument, "kf_predict needs dt >= 1");
  const StateCovariance f = transition(dt_frames);
  const StateVector std_dev =
      size_scaled_std(state.mean[2], state.mean[3], q.std_weight_position, q.std_weight_velocity);
  const StateCovariance noise = (std_dev.cwiseAbs2() * static_cast<double>(dt_frames)).asDiagonal();

  TrackState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + noise;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

KfUpdateResult kf_update(const TrackState& state, const Measurement& z, const MeasurementNoise& r) {
  const Matrix48 h = observation_matrix();
  const Matrix4 noise = Matrix4::Identity() * (r.sigma_px * r.sigma_px);
  const Matrix4 innovation_cov = h * state.covariance * h.transpose() + noise;
  // K = P H^T S^-1, solved rather than inverted.
  const Eigen::Matrix<double, 8, 4> gain =
      innovation_cov.llt().solve(h * state.covariance.transpose()).transpose();

  Eigen::Vector4d residual(z.x, z.y, z.w, z.h);
  residual -= h * state.mean;

  KfUpdateResult out;
  out.state.mean = state.mean + gain * residual;
  const StateCovariance i_kh = StateCovariance::Identity() - gain * h;
  out.state.covariance =
      i_kh * state.covariance * i_kh.transpose() + gain * noise * gain.transpose();
  out.state.covariance = 0.5 * (out.state.covariance + out.state.covariance.transpose()).eval();

  for (int k : {2, 3}) {
    if (out.state.mean[k] <= 0.0) {
      out.state.mean[k] = 1.0;
      out.size_clamped = true;
    }
  }
  return out;
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  if (rows == 0) return {};
  const int n = std::max(rows, cols);
  const double top = cols > 0 ? weights.maxCoeff() : 0.0;

  // Square min-cost problem; padding entries cost as much as a zero weight.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, top);
  if (cols > 0) cost.topLeftCorner(rows, cols) = top - weights.array();

  // Hungarian method with potentials, 1-based.
  constexpr double kInfCost = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInfCost);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInfCost;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i < rows && j - 1 < cols) row_to_col[i] = j - 1;
  }
  return row_to_col;
}

Association associate(std::span<const Track> tracks, std::span<const Detection> detections, double iou_min) {
  if (!(iou_min > 0.0 && iou_min < 1.0)) throw Error(ErrorCode::kInvalidArgument, "iou_min must be in (0, 1)");
  Association out;
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(tracks.size(), detections.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const BBox tb = tracks[t].state.bbox();
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (tracks[t].cls != detections[d].cls) continue;
      const double overlap = iou(tb, detections[d].bbox);
      if (overlap >= iou_min) weights(t, d) = overlap;
    }
  }

  std::vector<char> det_used(detections.size(), 0);
  const auto assignment = max_weight_assignment(weights);
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const int d = assignment.empty() ? -1 : assignment[t];
    if (d >= 0 && weights(t, d) > 0.0) {
      out.matches.emplace_back(t, static_cast<std::size_t>(d));
      det_used[d] = 1;
    } else {
      out.unmatched_tracks.push_back(t);
    }
  }
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (!det_used[d]) out.unmatched_detections.push_back(d);
  }
  return out;
}

Tracker::Tracker(TrackerParams params) : params_(params) {
  if (params_.n_init < 1 || params_.max_age < 1)
    throw Error(ErrorCode::kInvalidArgument, "tracker n_init and max_age must be >= 1");
}

std::vector<Track> Tracker::step(std::span<const Detection> detections, long frame) {
  if (last_frame_ && frame <= *last_frame_)
    throw Error(ErrorCode::kInvalidArgument, "tracker frame indices must strictly increase");
  const int dt = last_frame_ ? static_cast<int>(frame - *last_frame_) : 1;
  last_frame_ = frame;

  for (auto& track : tracks_) {
    track.state = kf_predict(track.state, dt, params_.process);
    track.detection.reset();
  }

  const Association assoc = associate(tracks_, detections, params_.iou_min);
  for (const auto& [t, d] : assoc.matches) {
    Track& track = tracks_[t];
    track.state = kf_update(track.state, Measurement::from(detections[d].bbox), params_.measurement).state;
    track.detection = detections[d];
    ++track.hits;
    track.misses = 0;
    if (track.status == TrackStatus::kTentative && track.hits >= params_.n_init)
      track.status = TrackStatus::kConfirmed;
  }
  for (std::size_t t : assoc.unmatched_tracks) {
    Track& track = tracks_[t];
    ++track.misses;
    if (track.status == TrackStatus::kTentative || track.misses >= params_.max_age)
      track.status = TrackStatus::kDeleted;
  }
  for (std::size_t d : assoc.unmatched_detections) {
    Track track;
    track.track_id = next_id_++;
    track.state = kf_initiate(Measurement::from(detections[d].bbox), params_.process);
    track.cls = detections[d].cls;
    track.hits = 1;
    track.detection = detections[d];
    track.status = params_.n_init <= 1 ? TrackStatus::kConfirmed : TrackStatus::kTentative;
    tracks_.push_back(track);
  }

  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::kDeleted; });

  std::vector<Track> confirmed;
  for (const auto& track : tracks_) {
    if (track.status == TrackStatus::kConfirmed) confirmed.push_back(track);
  }
  return confirmed;
}

}  // namespace semmap
