#pragma once

#include <cstddef>
#include <vector>

#include "scdepth/se3.hpp"
#include "scdepth/trajectory.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Floor applied to scaled predictions before the log-based statistics.
inline constexpr double kMinEvalDepth = 1e-3;

struct DepthEvalReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rms = 0.0;
  double rms_log = 0.0;
  double log10 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_valid = 0;
  double scale = 1.0;  // median(gt) / median(pred)
};

/// Median-scaled depth errors over pixels with valid gt in (0, cap] and a valid
/// positive prediction. Throws DataError when no pixel qualifies.
DepthEvalReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double cap);

/// Median with the two middle elements averaged for even sizes.
double median(std::vector<double> values);

/// Similarity x -> scale * R x + t.
struct Sim3 {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return scale * (rotation * p) + translation; }
  Sim3 inverse() const;
};

/// Least-squares similarity (dof = 7) or rigid transform (dof = 6) mapping
/// the positions of `pred` onto those of `gt`. Throws DataError on length
/// mismatch, fewer than 3 poses, or collinear positions.
Sim3 align_sim3(const Trajectory& pred, const Trajectory& gt, int dof);
Sim3 align_points(const std::vector<Eigen::Vector3d>& source, const std::vector<Eigen::Vector3d>& target, int dof);

/// Position RMSE after alignment.
double ate(const Trajectory& pred, const Trajectory& gt, int dof);

struct OdomEvalReport {
  double ate_rmse = 0.0;
  double t_err = 0.0;  // percent
  double r_err = 0.0;  // degrees per 100 m
  Sim3 alignment;
};

struct RelativeErrors {
  double t_err = 0.0;  // percent
  double r_err = 0.0;  // degrees per 100 m
  std::size_t n_segments = 0;
};

/// KITTI segment errors over lengths 100..800 m starting at every frame.
/// Throws DataError when no segment fits in the ground-truth path.
RelativeErrors kitti_rel_errors(const Trajectory& pred, const Trajectory& gt);

/// Segment lengths of the KITTI protocol.
const std::vector<double>& kitti_segment_lengths();

struct ConsistencyReport {
  double fitness = 0.0;
  double rmse = 0.0;
  std::size_t n_corr = 0;
};

/// For every target point the nearest source point within `threshold`
/// (exact, grid hashed). Throws DataError on empty input, ConfigError on a
/// non-positive threshold.
ConsistencyReport consistency_metrics(const PointCloud& source, const PointCloud& target, double threshold);

}  // namespace scdepth
