#include <cmath>
#include <numbers>

#include <doctest.h>

#include "scdepth/errors.hpp"
#include "scdepth/random.hpp"
#include "scdepth/se3.hpp"
#include "scdepth/trajectory.hpp"

using namespace scdepth;

namespace {

Twist random_twist(Rng& rng, double max_norm) {
  Twist xi;
  for (int i = 0; i < 6; ++i) xi[i] = rng.normal();
  return xi * (max_norm * rng.uniform() / xi.norm());
}

double pose_distance(const Pose& a, const Pose& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("zero twist is the identity") {
  const Pose p = se3_exp(Twist::Zero());
  CHECK(pose_distance(p, Pose::identity()) == 0.0);
}

TEST_CASE("quarter turn about z") {
  Twist xi = Twist::Zero();
  xi[5] = std::numbers::pi / 2;
  const Pose p = se3_exp(xi);
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((p.rotation - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("log inverts exp for twists of norm below 1") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Twist xi = random_twist(rng, 1.0);
    CHECK((se3_log(se3_exp(xi)) - xi).norm() < 1e-9);
  }
}

TEST_CASE("exp inverts log up to angles near pi") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    Twist xi = random_twist(rng, 1.0);
    xi.tail<3>() *= 3.1 / std::max(xi.tail<3>().norm(), 1e-12) * rng.uniform();
    const Pose p = se3_exp(xi);
    CHECK(pose_distance(se3_exp(se3_log(p)), p) < 1e-9);
  }
}

TEST_CASE("log rejects rotations at pi") {
  Twist xi = Twist::Zero();
  xi[3] = std::numbers::pi;
  CHECK_THROWS_AS(se3_log(se3_exp(xi)), DomainError);
}

TEST_CASE("composition with the inverse is the identity") {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Pose p = se3_exp(random_twist(rng, 2.0));
    CHECK(pose_distance(p * p.inverse(), Pose::identity()) < 1e-12);
    const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
    CHECK((p.inverse() * (p * x) - x).norm() < 1e-12);
  }
}

TEST_CASE("adjoint conjugates the exponential") {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const Pose T = se3_exp(random_twist(rng, 1.5));
    const Twist xi = random_twist(rng, 0.5);
    const Pose lhs = se3_exp(T.adjoint() * xi);
    const Pose rhs = T * se3_exp(xi) * T.inverse();
    CHECK(pose_distance(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("rotations stay orthonormal") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose p = se3_exp(random_twist(rng, 3.0));
    CHECK(orthonormality_error(p.rotation) < 1e-12);
    CHECK(std::abs(p.rotation.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("nearest rotation projects a perturbed rotation back") {
  Rng rng(12);
  const Pose p = se3_exp(random_twist(rng, 1.0));
  Eigen::Matrix3d M = p.rotation;
  M(0, 1) += 1e-4;
  const Eigen::Matrix3d R = nearest_rotation(M);
  CHECK(orthonormality_error(R) < 1e-14);
  CHECK((R - p.rotation).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("rotation angle is stable near zero and pi") {
  CHECK(rotation_angle(so3_exp(Eigen::Vector3d(1e-9, 0, 0))) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(rotation_angle(so3_exp(Eigen::Vector3d(0, 0, std::numbers::pi - 1e-7))) ==
        doctest::Approx(std::numbers::pi - 1e-7).epsilon(1e-12));
}

TEST_CASE("trajectory relatives recompose bit-identically") {
  Rng rng(13);
  std::vector<Pose> rel;
  for (int i = 0; i < 30; ++i) rel.push_back(se3_exp(random_twist(rng, 0.3)));
  const Trajectory t = Trajectory::from_relatives(rel);
  const Trajectory again = Trajectory::from_relatives(t.relatives());
  REQUIRE(again.size() == t.size());
  Pose chained;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) chained = chained * rel[k - 1];
    CHECK(t[k].matrix() == chained.matrix());
  }
  CHECK(t[0].matrix() == Eigen::Matrix4d::Identity());
}

TEST_CASE("trajectory indices must increase") {
  Trajectory t;
  t.append(0, Pose::identity());
  t.append(3, Pose::identity());
  CHECK_THROWS_AS(t.append(3, Pose::identity()), ConfigError);
  CHECK_THROWS_AS(t.append(1, Pose::identity()), ConfigError);
}

TEST_CASE("anchored trajectory starts at the identity") {
  Rng rng(14);
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) poses.push_back(se3_exp(random_twist(rng, 1.0)));
  const Trajectory a = Trajectory(poses).anchored();
  CHECK(pose_distance(a[0], Pose::identity()) < 1e-12);
  CHECK(pose_distance(a[3], poses[0].inverse() * poses[3]) < 1e-12);
}
