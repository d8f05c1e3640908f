#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace scdepth {

/// se(3) tangent vector ordered (v, omega): translational part first.
using Twist = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Rigid transform p' = R p + t.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Eigen::Matrix4d& m);

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& other) const;

  Pose inverse() const;
  Eigen::Matrix4d matrix() const;

  /// Adjoint acting on (v, omega) twists: exp(Ad * xi) = T exp(xi) T^-1.
  Matrix6d adjoint() const;

  /// Copy with translation multiplied by s.
  Pose scaled(double s) const { return {rotation, translation * s}; }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);

/// Throws DomainError when the rotation angle is >= pi - 1e-6.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& R);

/// Rotation angle in radians, stable near 0 and pi.
double rotation_angle(const Eigen::Matrix3d& R);

Pose se3_exp(const Twist& xi);

/// Throws DomainError when the rotation angle is >= pi - 1e-6.
Twist se3_log(const Pose& pose);

inline Pose se3_compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose se3_inverse(const Pose& p) { return p.inverse(); }

/// Closest rotation in the Frobenius sense (SVD projection with det = +1).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M);

/// Largest absolute entry of R R^T - I.
double orthonormality_error(const Eigen::Matrix3d& R);

}  // namespace scdepth
