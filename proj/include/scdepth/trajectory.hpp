#pragma once

#include <vector>

#include "scdepth/se3.hpp"

namespace scdepth {

/// Time-indexed world-from-camera poses with strictly increasing frame indices.
class Trajectory {
 public:
  Trajectory() = default;

  /// Frames 0..n-1.
  explicit Trajectory(std::vector<Pose> poses);

  /// Throws ConfigError unless index exceeds the last one.
  void append(int index, const Pose& pose);

  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const Pose& operator[](std::size_t i) const { return poses_[i]; }
  const std::vector<Pose>& poses() const { return poses_; }
  const std::vector<int>& indices() const { return indices_; }

  std::vector<Eigen::Vector3d> positions() const;

  /// Same trajectory expressed in the frame of its first pose.
  Trajectory anchored() const;

  /// Relative motions T_{k-1}^-1 T_k, k = 1..n-1.
  std::vector<Pose> relatives() const;

  /// Chains relative motions from the identity.
  static Trajectory from_relatives(const std::vector<Pose>& relatives);

  /// Sum of distances between consecutive positions.
  double path_length() const;

 private:
  std::vector<int> indices_;
  std::vector<Pose> poses_;
};

}  // namespace scdepth
