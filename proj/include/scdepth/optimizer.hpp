#pragma once

#include <cstdint>
#include <vector>

#include "scdepth/losses.hpp"
#include "scdepth/se3.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

enum class PoseMode {
  Frozen,  // relative poses stay at their initial values
  Joint,   // relative poses descend together with depth
};

struct TrainConfig {
  LossWeights weights;
  /// Per-pixel step on the depth logits. The loss is a pixel mean, so the
  /// update is step_size * N * gradient and behaves alike at every resolution.
  double step_size = 0.0025;
  /// Gradient-descent step on the relative-pose twists (Joint mode).
  double pose_step_size = 1e-3;
  int iterations = 2000;
  std::uint64_t seed = 0;
  int snippet_length = 3;
  bool bidirectional = true;
  PoseMode pose_mode = PoseMode::Frozen;

  void validate() const;
};

struct LossRecord {
  int step = 0;
  double total = 0.0;
  double photometric = 0.0;  // masked photometric, summed over pairs
  double smoothness = 0.0;
  double geometry = 0.0;
};

/// Per-frame logit fields mapped through the sigmoid depth parameterization,
/// plus the relative pose P_{k,k+1} (camera k to camera k+1) of each adjacent pair.
struct TrainState {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> logits;
  std::vector<Pose> pair_poses;
  int step = 0;
  std::vector<LossRecord> history;

  DepthMap depth(std::size_t frame) const;
  std::vector<DepthMap> depths() const;
  std::vector<Twist> twists() const;

  /// Running minimum of the recorded totals.
  std::vector<double> smoothed_totals() const;
};

/// Logit whose sigmoid maps to `depth`; depth must lie in (0.1, 100).
double depth_to_logit(double depth);
double logit_to_depth(double logit);

/// State holding the given depths and relative poses exactly (up to the
/// logit round trip).
TrainState make_state(const std::vector<DepthMap>& depths, const std::vector<Pose>& pair_poses);

/// Constant depth of 10 units jittered by the seed, identity relative poses.
TrainState initial_state(int width, int height, std::size_t n_frames, std::uint64_t seed);

struct SnippetLoss {
  LossRecord record;
  std::vector<std::vector<double>> grad_logits;
  std::vector<Twist> grad_twists;  // left-multiplied perturbation of each pair pose
};

/// Objective summed over adjacent pairs (and their reverses when bidirectional).
SnippetLoss evaluate_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainState& state,
                             const TrainConfig& config);

/// Fixed-step gradient descent on the logits (and twists in Joint mode).
/// Deterministic. Throws NumericalError naming the step when the loss stops
/// being finite.
TrainState optimize_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainConfig& config,
                            TrainState state);
TrainState optimize_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainConfig& config);

struct ConsistencyProbe {
  std::vector<double> ratios;  // median(D_i / D_i_truth)
  double spread = 1.0;         // max ratio / min ratio
};

ConsistencyProbe consistency_probe(const std::vector<DepthMap>& depths, const std::vector<DepthMap>& truth);

}  // namespace scdepth
