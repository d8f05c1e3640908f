#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "scdepth/errors.hpp"
#include "scdepth/geometry.hpp"
#include "scdepth/losses.hpp"
#include "scdepth/oracle.hpp"

using namespace scdepth;

namespace {

SceneSpec fronto(double depth) {
  SceneSpec s;
  s.planes.push_back({Eigen::Vector3d::UnitZ(), depth, 3});
  return s;
}

double mean_warp_residual(const ImageGrid& a, const WarpResult& w) {
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < a.pixel_count(); ++i) {
    if (!w.valid[i]) continue;
    for (int c = 0; c < a.channels(); ++c) {
      sum += std::abs(a.data()[i * a.channels() + c] - w.image.data()[i * a.channels() + c]);
      ++n;
    }
  }
  return n ? sum / n : 1.0;
}

}  // namespace

TEST_CASE("fronto-parallel plane renders constant depth") {
  const Intrinsics K = default_intrinsics(32, 24);
  const auto [img, depth] = render(fronto(10.0), Pose::identity(), K);
  for (double d : depth.values()) CHECK(d == 10.0);
  CHECK(depth.valid_count() == 32u * 24u);
  for (double v : img.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("rendered depth equals the ray-plane formula") {
  const Intrinsics K = default_intrinsics(40, 30);
  const SceneSpec scene = default_scene(K, 4);
  Twist xi;
  xi << 0.3, -0.2, 0.5, 0.02, -0.03, 0.01;
  const Pose pose = se3_exp(xi);
  const auto [img, depth] = render(scene, pose, K);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const Eigen::Vector3d dir = pose.rotation * pixel_ray(K, x, y);
      double best = 1e300;
      for (const auto& p : scene.planes) {
        const Eigen::Vector3d n = p.normal.normalized();
        const double t = (p.offset / p.normal.norm() - n.dot(pose.translation)) / n.dot(dir);
        if (t > 0) best = std::min(best, t);
      }
      CHECK(std::abs(depth.at(x, y) - best) < 1e-12 * best);
    }
  }
}

TEST_CASE("two views of a static scene agree through the warp") {
  const Intrinsics K = default_intrinsics(64, 64);
  const SceneSpec scene = default_scene(K, 1);
  Twist xi;
  xi << 0.1, 0.05, 0.3, 0.01, 0.02, -0.01;
  const Pose b = se3_exp(xi);
  const auto [ia, da] = render(scene, Pose::identity(), K);
  const auto [ib, db] = render(scene, b, K);
  CHECK(mean_warp_residual(ia, warp_image(ib, da, b.inverse(), K)) < 1e-3);
  const DepthInconsistency di = depth_inconsistency(da, db, b.inverse(), K);
  int n = 0, creased = 0;
  for (std::size_t i = 0; i < di.diff.size(); ++i) {
    if (!di.valid[i]) continue;
    ++n;
    const int x = static_cast<int>(i) % K.width, y = static_cast<int>(i) / K.width;
    if (!oracle::single_plane_footprint(scene, b, b.inverse(), K, x, y, da.values()[i])) {
      ++creased;
      continue;
    }
    CHECK(di.diff[i] < 1e-3);
  }
  CHECK(n > 0);
  CHECK(creased < 0.05 * n);
}

TEST_CASE("rendering is deterministic and seed-dependent") {
  const Intrinsics K = default_intrinsics(16, 16);
  const auto a = render(default_scene(K, 7), Pose::identity(), K);
  const auto b = render(default_scene(K, 7), Pose::identity(), K);
  const auto c = render(default_scene(K, 8), Pose::identity(), K);
  CHECK(a.first.data() == b.first.data());
  CHECK(a.first.data() != c.first.data());
}

TEST_CASE("zero motion gives identical frames") {
  const Intrinsics K = default_intrinsics(24, 24);
  const auto frames = render_sequence(default_scene(K), constant_motion_sequence(K, 3, Twist::Zero()));
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].image.data() == frames[2].image.data());
  CHECK(frames[0].depth.values() == frames[1].depth.values());
}

TEST_CASE("moving patch translates in 3D") {
  const Intrinsics K = default_intrinsics(48, 48);
  SceneSpec scene = fronto(20.0);
  scene.patches.push_back({Eigen::Vector4d(10, 10, 30, 30), 8.0, Eigen::Vector3d(0.5, 0, 0), 9});
  const auto f0 = render(scene, Pose::identity(), K, 0);
  const auto f2 = render(scene, Pose::identity(), K, 2);
  CHECK(f0.second.at(20, 20) == 8.0);
  CHECK(f0.second.at(2, 2) == 20.0);
  // One unit of x displacement at depth 8 is fx / 8 pixels.
  const int shift = static_cast<int>(std::round(K.fx / 8.0));
  CHECK(f2.second.at(20 + shift, 20) == 8.0);
  for (int c = 0; c < 3; ++c) CHECK(f2.first.at(20 + shift, 20, c) != f0.first.at(20 + shift, 20, c));
}

TEST_CASE("scene validation") {
  const Intrinsics K = default_intrinsics(16, 16);
  SceneSpec empty;
  CHECK_THROWS_AS(render(empty, Pose::identity(), K), ConfigError);
  Pose away;
  away.rotation = so3_exp(Eigen::Vector3d(0, 3.1, 0));
  CHECK_THROWS_AS(render(fronto(10.0), away, K), ConfigError);
  CHECK_THROWS_AS(render(fronto(80.0), Pose::identity(), K), ConfigError);
  SceneSpec two = fronto(10.0);
  two.channels = 2;
  CHECK_THROWS_AS(render(two, Pose::identity(), K), ConfigError);
}

TEST_CASE("sequences reject large inter-frame motion") {
  const Intrinsics K = default_intrinsics(16, 16);
  Twist turn = Twist::Zero();
  turn[4] = 10.5 * 3.14159265358979 / 180.0;
  CHECK_THROWS_AS(render_sequence(fronto(10.0), constant_motion_sequence(K, 2, turn)), ConfigError);
  Twist jump = Twist::Zero();
  jump[0] = 1.0;
  CHECK_THROWS_AS(render_sequence(fronto(10.0), constant_motion_sequence(K, 2, jump)), ConfigError);
  jump[0] = 0.9;
  CHECK_NOTHROW(render_sequence(fronto(10.0), constant_motion_sequence(K, 2, jump)));
}

TEST_CASE("constant motion sequence composes the step") {
  const Intrinsics K = default_intrinsics(8, 8);
  Twist step;
  step << 0.1, 0, 0.2, 0, 0.01, 0;
  const SequenceSpec seq = constant_motion_sequence(K, 4, step);
  CHECK(seq.n_frames() == 4);
  const Pose rel = seq.poses[2].inverse() * seq.poses[3];
  CHECK((se3_log(rel) - step).norm() < 1e-12);
}

TEST_CASE("scene config grammar") {
  const SceneConfig c = parse_scene_config(
      "# camera\nwidth = 40\nheight = 30\nframes = 5  # five\nmotion = 0.1 0 0 0 0 0\n"
      "plane = 0 0 1 12 4\npatch = 5 5 15 15 6 0.1 0 0 2\nchannels = 1\n");
  CHECK(c.sequence.intrinsics.width == 40);
  CHECK(c.sequence.n_frames() == 5);
  CHECK(c.scene.planes.size() == 1);
  CHECK(c.scene.patches.size() == 1);
  CHECK(c.scene.channels == 1);
  CHECK(c.sequence.poses[1].translation.x() == doctest::Approx(0.1));

  const SceneConfig d = parse_scene_config("width = 32\nheight = 32\n");
  CHECK(d.scene.planes.size() == 3);

  CHECK_THROWS_AS(parse_scene_config("colour = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_scene_config("width 32\n"), ParseError);
  CHECK_THROWS_AS(parse_scene_config("motion = 1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse_scene_config("width = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_scene_config("cx = 100\n"), ConfigError);
  CHECK_THROWS_AS(load_scene_config("/nonexistent/scene.cfg"), ParseError);
}

TEST_CASE("additive noise is seeded") {
  const Intrinsics K = default_intrinsics(16, 16);
  SceneSpec s = default_scene(K);
  s.noise_sigma = 0.01;
  s.noise_seed = 5;
  const auto a = render(s, Pose::identity(), K);
  const auto b = render(s, Pose::identity(), K);
  CHECK(a.first.data() == b.first.data());
  CHECK(a.first.data() != render(default_scene(K), Pose::identity(), K).first.data());
}
