#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "scdepth/errors.hpp"
#include "scdepth/metrics.hpp"
#include "scdepth/random.hpp"

using namespace scdepth;

namespace {

DepthMap random_depth(Rng& rng, int w, int h, double lo, double hi) {
  DepthMap d(w, h);
  for (double& v : d.values()) v = rng.uniform(lo, hi);
  return d;
}

Pose random_pose(Rng& rng, double t, double r) {
  Twist xi;
  for (int i = 0; i < 3; ++i) xi[i] = rng.uniform(-t, t);
  for (int i = 3; i < 6; ++i) xi[i] = rng.uniform(-r, r);
  return se3_exp(xi);
}

// Roughly straight drive with gentle turns, about 2 m per frame.
Trajectory drive(Rng& rng, int n) {
  std::vector<Pose> rel;
  for (int i = 1; i < n; ++i) {
    Twist xi;
    xi << rng.uniform(-0.05, 0.05), rng.uniform(-0.02, 0.02), 2.0 + rng.uniform(-0.2, 0.2), 0.0,
        rng.uniform(-0.02, 0.02), 0.0;
    rel.push_back(se3_exp(xi));
  }
  return Trajectory::from_relatives(rel);
}

std::vector<Eigen::Matrix4d> matrices(const Trajectory& t) {
  std::vector<Eigen::Matrix4d> m;
  for (const auto& p : t.poses()) m.push_back(p.matrix());
  return m;
}

Trajectory apply(const Sim3& s, const Trajectory& t) {
  std::vector<Pose> out;
  for (const auto& p : t.poses()) out.push_back({s.rotation * p.rotation, s * p.translation});
  return Trajectory(out);
}

}  // namespace

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK_THROWS_AS(median({}), DataError);
}

TEST_CASE("depth metrics closed forms") {
  Rng rng(1);
  const DepthMap gt = random_depth(rng, 20, 10, 1, 70);
  const DepthEvalReport same = depth_metrics(gt, gt, 80);
  CHECK(same.abs_rel == 0.0);
  CHECK(same.delta1 == 1.0);
  const DepthEvalReport twice = depth_metrics(gt.scaled(2.0), gt, 80);
  CHECK(twice.abs_rel == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(twice.scale == 0.5);
  CHECK_THROWS_AS(depth_metrics(gt, gt, 0.5), DataError);
  CHECK_THROWS_AS(depth_metrics(DepthMap(3, 3, 1), gt, 80), ConfigError);
}

TEST_CASE("depth metrics with half the pixels off by ten percent") {
  Rng rng(2);
  const DepthMap gt = random_depth(rng, 16, 16, 2, 60);
  DepthMap pred = gt;
  for (int i = 0; i < pred.pixel_count(); i += 2) pred.values()[i] *= 1.1;
  const DepthEvalReport r = depth_metrics(pred, gt, 80);
  const oracle::DepthStats o = oracle::depth_stats(pred, gt, 80);
  CHECK(std::abs(r.abs_rel - o.abs_rel) < 1e-12);
  CHECK(std::abs(r.delta1 - o.d1) < 1e-12);
  CHECK(r.n_valid == o.n);
}

TEST_CASE("depth metrics respect the cap and invalid pixels") {
  Rng rng(3);
  DepthMap gt = random_depth(rng, 10, 10, 1, 100);
  DepthMap pred = random_depth(rng, 10, 10, 1, 100);
  gt.set_valid(0, 0, false);
  pred.set_valid(1, 0, false);
  const DepthEvalReport r = depth_metrics(pred, gt, 80);
  const oracle::DepthStats o = oracle::depth_stats(pred, gt, 80);
  CHECK(r.n_valid == o.n);
  CHECK(r.rms_log == doctest::Approx(o.rms_log).epsilon(1e-12));
  CHECK(r.delta1 <= r.delta2);
  CHECK(r.delta2 <= r.delta3);
  CHECK(r.delta3 <= 1.0);
}

TEST_CASE("depth metrics are invariant to prediction scale") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthMap gt = random_depth(rng, 9, 7, 1, 50);
    const DepthMap pred = random_depth(rng, 9, 7, 1, 50);
    const DepthEvalReport a = depth_metrics(pred, gt, 80);
    const DepthEvalReport b = depth_metrics(pred.scaled(std::exp(rng.uniform(-3, 3))), gt, 80);
    CHECK(b.abs_rel == doctest::Approx(a.abs_rel).epsilon(1e-12));
    CHECK(b.rms == doctest::Approx(a.rms).epsilon(1e-12));
    CHECK(b.delta1 == a.delta1);
  }
}

TEST_CASE("alignment recovers a known similarity") {
  Rng rng(5);
  std::vector<Pose> poses;
  for (int i = 0; i < 30; ++i) poses.push_back(random_pose(rng, 5, 0.3));
  const Trajectory gt(poses);
  const Sim3 known{2.5, random_pose(rng, 0, 2.0).rotation, Eigen::Vector3d(1, -2, 3)};
  const Trajectory pred = apply(known, gt);
  const Sim3 s = align_sim3(pred, gt, 7);
  // align maps pred onto gt, i.e. it inverts the known transform.
  const Sim3 inv = known.inverse();
  CHECK(std::abs(s.scale - inv.scale) < 1e-9);
  CHECK((s.rotation - inv.rotation).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((s.translation - inv.translation).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(ate(pred, gt, 7) < 1e-9);

  const Sim3 id = align_sim3(gt, gt, 7);
  CHECK(std::abs(id.scale - 1.0) < 1e-12);
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("rigid alignment leaves scale error, similarity removes it") {
  Rng rng(6);
  std::vector<Pose> poses;
  for (int i = 0; i < 20; ++i) poses.push_back(random_pose(rng, 5, 0.3));
  const Trajectory gt(poses);
  const Trajectory pred = apply(Sim3{0.5, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()}, gt);
  CHECK(ate(pred, gt, 6) > 0.1);
  CHECK(ate(pred, gt, 7) < 1e-12);
  CHECK(align_sim3(pred, gt, 6).scale == 1.0);
}

TEST_CASE("ate with a single outlier") {
  // Square corners plus a displaced copy of one of them.
  std::vector<Pose> gt_p(8), pred_p(8);
  const double d = 0.3;
  for (int i = 0; i < 8; ++i) {
    gt_p[i].translation = Eigen::Vector3d(i % 2, (i / 2) % 2, i / 4) * 4.0;
    pred_p[i] = gt_p[i];
  }
  pred_p[5].translation.x() += d;
  const Trajectory gt(gt_p), pred(pred_p);
  const double expected = oracle::ate_rmse(pred.positions(), gt.positions(), true);
  CHECK(std::abs(ate(pred, gt, 7) - expected) < 1e-12);
  // Translation-only fit: the mean shift spreads d/N over every pose.
  const double N = 8;
  const double translation_only = std::sqrt((d * d * (N - 1) / N) / N);
  CHECK(ate(pred, gt, 7) <= translation_only + 1e-12);
  CHECK(ate(pred, gt, 7) > 0.5 * translation_only);
}

TEST_CASE("ate with dof 7 is invariant to a similarity of the prediction") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Pose> a, b;
    for (int i = 0; i < 15; ++i) {
      a.push_back(random_pose(rng, 5, 0.3));
      b.push_back(random_pose(rng, 5, 0.3));
    }
    const Trajectory gt(a), pred(b);
    const Sim3 s{rng.uniform(0.2, 5), random_pose(rng, 0, 2).rotation, Eigen::Vector3d(rng.normal(), 1, 2)};
    CHECK(ate(apply(s, pred), gt, 7) == doctest::Approx(ate(pred, gt, 7)).epsilon(1e-9));
  }
}

TEST_CASE("alignment errors") {
  std::vector<Pose> line(5);
  for (int i = 0; i < 5; ++i) line[i].translation = Eigen::Vector3d(i, 2 * i, 0);
  CHECK_THROWS_AS(align_sim3(Trajectory(line), Trajectory(line), 7), DataError);
  std::vector<Pose> two(2);
  CHECK_THROWS_AS(align_sim3(Trajectory(two), Trajectory(two), 7), DataError);
  std::vector<Pose> three(3);
  three[1].translation = {1, 0, 0};
  three[2].translation = {0, 1, 0};
  CHECK_THROWS_AS(align_sim3(Trajectory(three), Trajectory(line), 7), DataError);
  CHECK_THROWS_AS(align_sim3(Trajectory(three), Trajectory(three), 5), ConfigError);
}

TEST_CASE("kitti errors closed forms") {
  Rng rng(8);
  const Trajectory gt = drive(rng, 120);
  const RelativeErrors same = kitti_rel_errors(gt, gt);
  CHECK(same.t_err == 0.0);
  CHECK(same.r_err < 1e-9);
  CHECK(same.n_segments > 0);

  std::vector<Pose> scaled;
  for (const auto& p : gt.poses()) scaled.push_back(p.scaled(1.05));
  const RelativeErrors r = kitti_rel_errors(Trajectory(scaled), gt);
  CHECK(r.t_err == doctest::Approx(5.0).epsilon(0.05));
  const oracle::RelErr o = oracle::kitti_errors(matrices(Trajectory(scaled)), matrices(gt));
  CHECK(std::abs(r.t_err - o.t_err) < 1e-10);
  CHECK(static_cast<int>(r.n_segments) == o.segments);

  CHECK_THROWS_AS(kitti_rel_errors(drive(rng, 20), drive(rng, 20)), DataError);
  CHECK(kitti_segment_lengths().front() == 100.0);
  CHECK(kitti_segment_lengths().back() == 800.0);
}

TEST_CASE("kitti errors on a three-frame toy by hand") {
  std::vector<Pose> gt(3), pred(3);
  gt[1].translation = {0, 0, 60};
  gt[2].translation = {0, 0, 120};
  pred = gt;
  pred[2].translation = {3, 0, 120};
  pred[2].rotation = so3_exp(Eigen::Vector3d(0, 0.01, 0));
  const RelativeErrors r = kitti_rel_errors(Trajectory(pred), Trajectory(gt));
  // Only the 100 m segment from frame 0 fits, ending at frame 2.
  CHECK(r.n_segments == 1);
  const Pose err = pred[2].inverse() * gt[2];
  CHECK(r.t_err == doctest::Approx(100.0 * err.translation.norm() / 100.0).epsilon(1e-14));
  CHECK(r.r_err == doctest::Approx(0.01 * 180.0 / std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("consistency metrics") {
  Rng rng(9);
  PointCloud a;
  for (int i = 0; i < 100; ++i) a.points.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  const ConsistencyReport same = consistency_metrics(a, a, 0.01);
  CHECK(same.fitness == 1.0);
  CHECK(same.rmse == 0.0);
  PointCloud shifted = a;
  for (auto& p : shifted.points) p.x() += 5.0;
  CHECK(consistency_metrics(a, shifted, 2.5).fitness == 0.0);
  PointCloud b;
  for (int i = 0; i < 100; ++i) b.points.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  double last = 0.0;
  for (double thr : {0.01, 0.03, 0.05, 0.1, 0.2, 0.5}) {
    const ConsistencyReport r = consistency_metrics(a, b, thr);
    const oracle::Overlap o = oracle::overlap(a.points, b.points, thr);
    CHECK(std::abs(r.fitness - o.fitness) < 1e-12);
    CHECK(std::abs(r.rmse - o.rmse) < 1e-12);
    CHECK(r.n_corr == o.n_corr);
    CHECK(r.fitness >= last);
    last = r.fitness;
  }
  CHECK_THROWS_AS(consistency_metrics(PointCloud{}, b, 0.1), DataError);
  CHECK_THROWS_AS(consistency_metrics(a, b, 0.0), ConfigError);
}
