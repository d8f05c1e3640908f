#include "scdepth/trajectory.hpp"

#include <string>

#include "scdepth/errors.hpp"

namespace scdepth {

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  indices_.resize(poses_.size());
  for (std::size_t i = 0; i < poses_.size(); ++i) indices_[i] = static_cast<int>(i);
}

void Trajectory::append(int index, const Pose& pose) {
  if (!indices_.empty() && index <= indices_.back()) {
    throw ConfigError("trajectory: frame index " + std::to_string(index) + " does not follow " +
                      std::to_string(indices_.back()));
  }
  indices_.push_back(index);
  poses_.push_back(pose);
}

std::vector<Eigen::Vector3d> Trajectory::positions() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(poses_.size());
  for (const auto& p : poses_) out.push_back(p.translation);
  return out;
}

Trajectory Trajectory::anchored() const {
  Trajectory out;
  if (poses_.empty()) return out;
  const Pose inv = poses_.front().inverse();
  for (std::size_t i = 0; i < poses_.size(); ++i) out.append(indices_[i], inv * poses_[i]);
  return out;
}

std::vector<Pose> Trajectory::relatives() const {
  std::vector<Pose> out;
  for (std::size_t i = 1; i < poses_.size(); ++i) out.push_back(poses_[i - 1].inverse() * poses_[i]);
  return out;
}

Trajectory Trajectory::from_relatives(const std::vector<Pose>& relatives) {
  Trajectory out;
  Pose current = Pose::identity();
  out.append(0, current);
  for (std::size_t i = 0; i < relatives.size(); ++i) {
    current = current * relatives[i];
    out.append(static_cast<int>(i) + 1, current);
  }
  return out;
}

double Trajectory::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < poses_.size(); ++i) len += (poses_[i].translation - poses_[i - 1].translation).norm();
  return len;
}

}  // namespace scdepth
