#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semmap/tracking.hpp"

using namespace semmap;

namespace {

Detection det(double x, double y, double w, double h, ObjectClass cls = ObjectClass::kChair) {
  return {{x, y, w, h}, cls, 1.0};
}

Track track_at(const BBox& b, ObjectClass cls = ObjectClass::kChair) {
  Track t;
  t.state = kf_initiate(Measurement::from(b));
  t.cls = cls;
  return t;
}

}  // namespace

TEST(KalmanPredict, ConstantVelocity) {
  TrackState s = kf_initiate({100, 50, 20, 40});
  TrackState p = kf_predict(s, 1);
  EXPECT_DOUBLE_EQ(p.mean[0], 100.0);
  EXPECT_DOUBLE_EQ(p.mean[1], 50.0);
  s.mean[4] = 5.0;
  p = kf_predict(s, 1);
  EXPECT_DOUBLE_EQ(p.mean[0], 105.0);
  EXPECT_GT(p.covariance.trace(), s.covariance.trace());
}

TEST(KalmanUpdate, ExactMeasurementLimit) {
  TrackState s = kf_initiate({100, 50, 20, 40});
  s = kf_predict(s, 1);
  const auto r = kf_update(s, {110, 55, 22, 41}, MeasurementNoise{1e-6});
  EXPECT_NEAR(r.state.mean[0], 110.0, 1e-6);
  EXPECT_NEAR(r.state.mean[1], 55.0, 1e-6);
  EXPECT_NEAR(r.state.mean[2], 22.0, 1e-6);
  EXPECT_NEAR(r.state.mean[3], 41.0, 1e-6);
}

TEST(KalmanUpdate, MeasurementAtPredictionKeepsMean) {
  TrackState s = kf_initiate({100, 50, 20, 40});
  s.mean[4] = 3.0;
  s = kf_predict(s, 1);
  const auto r = kf_update(s, {s.mean[0], s.mean[1], s.mean[2], s.mean[3]});
  EXPECT_LT((r.state.mean - s.mean).cwiseAbs().maxCoeff(), 1e-9);
  for (int i = 0; i < 4; ++i) EXPECT_LE(r.state.covariance(i, i), s.covariance(i, i));
}

TEST(KalmanUpdate, MatchesInformationForm) {
  // Posterior covariance from (P^-1 + H^T R^-1 H)^-1, independent of the gain route.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 3);
  TrackState s = kf_initiate({200, 120, 30, 60});
  for (int k = 0; k < 5; ++k) s = kf_predict(s, 1);
  const double sigma = 2.0;
  const Measurement z{200 + n(rng), 120 + n(rng), 30 + n(rng), 60 + n(rng)};
  const auto r = kf_update(s, z, {sigma});
  Eigen::Matrix<double, 4, 8> H = Eigen::Matrix<double, 4, 8>::Zero();
  H.leftCols<4>().setIdentity();
  const Eigen::Matrix4d Rinv = Eigen::Matrix4d::Identity() / (sigma * sigma);
  const StateCovariance Pinf = (s.covariance.inverse() + H.transpose() * Rinv * H).inverse();
  EXPECT_LT((r.state.covariance - Pinf).cwiseAbs().maxCoeff(), 1e-6 * Pinf.cwiseAbs().maxCoeff());
  const Eigen::Vector4d zv(z.x, z.y, z.w, z.h);
  const StateVector mean = s.mean + Pinf * H.transpose() * Rinv * (zv - H * s.mean);
  EXPECT_LT((r.state.mean - mean).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(KalmanUpdate, NonPositiveSizeIsClampedAndFlagged) {
  TrackState s = kf_initiate({100, 100, 3, 3});
  const auto r = kf_update(s, {100, 100, -50, -50}, MeasurementNoise{1e-3});
  EXPECT_TRUE(r.size_clamped);
  EXPECT_GE(r.state.mean[2], 1.0);
  EXPECT_GE(r.state.mean[3], 1.0);
}

TEST(Iou, Examples) {
  const BBox a{1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {10, 10, 2, 2}), 0.0);
  EXPECT_NEAR(iou(a, {2, 1, 2, 2}), 1.0 / 3.0, 1e-15);
}

TEST(Iou, AgreesWithRectangleOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(0, 100), s(1, 40);
  for (int i = 0; i < 500; ++i) {
    const BBox a{c(rng), c(rng), s(rng), s(rng)}, b{c(rng), c(rng), s(rng), s(rng)};
    const double ref = oracle::rect_iou(a.left(), a.top(), a.right(), a.bottom(), b.left(), b.top(), b.right(),
                                        b.bottom());
    EXPECT_NEAR(iou(a, b), ref, 1e-12);
    EXPECT_NEAR(iou(a, b), iou(b, a), 1e-15);
  }
}

TEST(Associate, SimpleMatchAndReject) {
  std::vector<Track> tracks = {track_at({100, 100, 20, 20})};
  std::vector<Detection> close = {det(101, 100, 20, 20)};
  auto a = associate(tracks, close, 0.3);
  ASSERT_EQ(a.matches.size(), 1u);

  std::vector<Detection> far = {det(115, 100, 20, 20)};  // IoU = 5/35
  a = associate(tracks, far, 0.3);
  EXPECT_TRUE(a.matches.empty());
  EXPECT_EQ(a.unmatched_tracks.size(), 1u);
  EXPECT_EQ(a.unmatched_detections.size(), 1u);
}

TEST(Associate, ClassGated) {
  std::vector<Track> tracks = {track_at({100, 100, 20, 20}, ObjectClass::kDesk)};
  std::vector<Detection> dets = {det(100, 100, 20, 20, ObjectClass::kChair)};
  EXPECT_TRUE(associate(tracks, dets, 0.3).matches.empty());
}

TEST(Assignment, CrossCaseBeatsGreedy) {
  // Greedy takes 0.9 first and is left with 0.2 (total 1.1); optimum is 0.65 + 0.65.
  Eigen::MatrixXd w(2, 2);
  w << 0.9, 0.65, 0.65, 0.2;
  const auto a = max_weight_assignment(w);
  EXPECT_EQ(a[0], 1);
  EXPECT_EQ(a[1], 0);
  EXPECT_NEAR(w(0, a[0]) + w(1, a[1]), 1.3, 1e-12);
}

TEST(Assignment, OptimalAgainstPermutationOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = dim(rng), c = dim(rng);
    Eigen::MatrixXd w(r, c);
    std::vector<std::vector<double>> ref(r, std::vector<double>(c));
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) ref[i][j] = w(i, j) = u(rng) < 0.3 ? 0.0 : u(rng);
    }
    const auto a = max_weight_assignment(w);
    double total = 0.0;
    std::set<int> used;
    for (int i = 0; i < r; ++i) {
      if (a[i] < 0) continue;
      EXPECT_TRUE(used.insert(a[i]).second);
      total += w(i, a[i]);
    }
    EXPECT_NEAR(total, oracle::brute_force_assignment(ref), 1e-9);
  }
}

TEST(Tracker, LifecycleExamples) {
  Tracker tr;  // n_init 3, max_age 5
  const std::vector<Detection> d = {det(100, 100, 30, 30)};
  EXPECT_TRUE(tr.step(d, 0).empty());
  ASSERT_EQ(tr.tracks().size(), 1u);
  EXPECT_EQ(tr.tracks()[0].track_id, 1);
  EXPECT_EQ(tr.tracks()[0].status, TrackStatus::kTentative);
  EXPECT_TRUE(tr.step(d, 1).empty());
  const auto confirmed = tr.step(d, 2);
  ASSERT_EQ(confirmed.size(), 1u);
  EXPECT_EQ(confirmed[0].track_id, 1);

  for (long f = 3; f < 7; ++f) EXPECT_EQ(tr.step({}, f).size(), 1u);
  EXPECT_TRUE(tr.step({}, 7).empty());  // fifth miss
  EXPECT_TRUE(tr.tracks().empty());

  tr.step(d, 8);
  EXPECT_EQ(tr.tracks()[0].track_id, 2);  // ids are not reused
}

TEST(Tracker, TentativeTrackDiesOnMiss) {
  Tracker tr;
  tr.step(std::vector<Detection>{det(100, 100, 30, 30)}, 0);
  tr.step({}, 1);
  EXPECT_TRUE(tr.tracks().empty());
}

TEST(Tracker, FramesMustIncrease) {
  Tracker tr;
  tr.step({}, 4);
  EXPECT_THROW(tr.step({}, 4), std::exception);
}

TEST(Tracker, CovarianceStaysSymmetricPsd) {
  Tracker tr;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 2);
  for (long f = 0; f < 60; ++f) {
    std::vector<Detection> d = {det(100 + 3 * f + n(rng), 200 + n(rng), 40 + n(rng), 80 + n(rng))};
    tr.step(d, f);
    for (const auto& t : tr.tracks()) {
      const auto& P = t.state.covariance;
      EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
      Eigen::SelfAdjointEigenSolver<StateCovariance> es(P);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
  }
}
