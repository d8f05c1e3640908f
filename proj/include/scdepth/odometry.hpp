#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scdepth/se3.hpp"
#include "scdepth/trajectory.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Pixel position plus disparity (inverse depth).
struct Correspondence {
  Eigen::Vector3d observed;   // (u, v, disparity) in the current frame
  Eigen::Vector3d projected;  // (u', v', disparity') from the previous frame or map
};

enum class ReprojectionMode { Planar, WithDisparity };

/// Euclidean residual over (u, v), or over (u, v, disparity) for WithDisparity.
/// Disparities enter in raw inverse-depth units. Throws DomainError on a
/// non-positive disparity.
double reprojection_error(const Correspondence& c, ReprojectionMode mode);

enum class InitMode { MotionModel, External };

/// Relative motion T_t^-1 T_{t+1} used to start tracking frame t+1.
/// MotionModel repeats the last relative motion of `history` (identity with
/// fewer than two poses). External returns `external` and throws ConfigError
/// when it is missing.
Pose init_pose(InitMode mode, const Trajectory& history, const std::optional<Pose>& external = std::nullopt);

struct TrackOptions {
  int max_iterations = 50;  // per pyramid level
  int pyramid_levels = 3;
  double huber_delta = 0.1;
  double gamma = 0.5;  // weight of the squared depth-inconsistency residual
  double convergence = 1e-8;
  double min_coverage = 0.1;
  double max_photometric = 0.5;

  void validate() const;
};

struct TrackResult {
  Pose pose;      // world from current camera
  Pose relative;  // previous camera from current camera
  int iterations = 0;
  double cost = 0.0;
  double coverage = 0.0;  // fraction of previous pixels landing inside the current image
  bool converged = false;
};

/// Refines `init` (relative motion, as returned by init_pose) by aligning the
/// current image to the previous frame. With `cur_depth`, residuals are
/// weighted by the self-discovered mask and a geometry term is added.
/// Throws TrackingLostError when the overlap or the photometric fit is too poor.
TrackResult track_frame(const ImageGrid& prev_image, const DepthMap& prev_depth, const Pose& prev_pose,
                        const ImageGrid& cur_image, const Intrinsics& K, const Pose& init, const TrackOptions& options,
                        const DepthMap* cur_depth = nullptr);

struct OdometryOptions {
  TrackOptions track;
  InitMode init = InitMode::MotionModel;
  /// External mode: relative motion for frames 1..n-1.
  std::vector<Pose> external;
  /// Use the current frame's depth for masking and the geometry term.
  bool use_current_depth = true;
};

/// Tracks every frame against its predecessor. Frame 0 is the world origin.
/// A TrackingLostError carries the index of the failing frame.
Trajectory run_odometry(const std::vector<std::pair<ImageGrid, DepthMap>>& frames, const Intrinsics& K,
                        const OdometryOptions& options);

}  // namespace scdepth
