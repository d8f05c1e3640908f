#include "scdepth/se3.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "scdepth/errors.hpp"

namespace scdepth {

namespace {

constexpr double kLogAngleLimit = std::numbers::pi - 1e-6;

// Coefficients of the left Jacobian V = I + b W + c W^2 with W = skew(omega).
void left_jacobian_coefficients(double theta, double& b, double& c) {
  const double t2 = theta * theta;
  if (theta < 1e-4) {
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    b = (1.0 - std::cos(theta)) / t2;
    c = (theta - std::sin(theta)) / (t2 * theta);
  }
}

}  // namespace

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Pose Pose::operator*(const Pose& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

Pose Pose::inverse() const {
  const Eigen::Matrix3d rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Matrix6d Pose::adjoint() const {
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = rotation;
  ad.topRightCorner<3, 3>() = skew(translation) * rotation;
  ad.bottomRightCorner<3, 3>() = rotation;
  return ad;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
      -w.y(), w.x(), 0.0;
  return s;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew(omega);
  double a;
  double b;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

double rotation_angle(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double s = 0.5 * axis.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  return std::atan2(s, c);
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d axis = 0.5 * Eigen::Vector3d(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double s = axis.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double theta = std::atan2(s, c);
  if (theta >= kLogAngleLimit) {
    throw DomainError("so3_log: rotation angle " + std::to_string(theta) + " too close to pi");
  }
  if (theta < 1e-4) {
    return axis * (1.0 + theta * theta / 6.0 + 7.0 * std::pow(theta, 4) / 360.0);
  }
  return axis * (theta / s);
}

Pose se3_exp(const Twist& xi) {
  const Eigen::Vector3d v = xi.head<3>();
  const Eigen::Vector3d omega = xi.tail<3>();
  const Eigen::Matrix3d W = skew(omega);
  double b;
  double c;
  left_jacobian_coefficients(omega.norm(), b, c);
  const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + b * W + c * W * W;
  return {so3_exp(omega), V * v};
}

Twist se3_log(const Pose& pose) {
  const Eigen::Vector3d omega = so3_log(pose.rotation);
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew(omega);
  // V^-1 = I - W/2 + k W^2
  double k;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    k = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    k = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / (theta * theta);
  }
  const Eigen::Matrix3d V_inv = Eigen::Matrix3d::Identity() - 0.5 * W + k * W * W;
  Twist xi;
  xi.head<3>() = V_inv * pose.translation;
  xi.tail<3>() = omega;
  return xi;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

double orthonormality_error(const Eigen::Matrix3d& R) {
  return (R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace scdepth
