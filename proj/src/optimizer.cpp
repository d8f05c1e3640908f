#include "scdepth/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scdepth/errors.hpp"
#include "scdepth/geometry.hpp"
#include "scdepth/metrics.hpp"
#include "scdepth/random.hpp"

namespace scdepth {

namespace {

constexpr double kLogitLimit = 30.0;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void TrainConfig::validate() const {
  weights.validate();
  if (!(step_size > 0.0)) throw ConfigError("train: step size must be positive");
  if (!(pose_step_size > 0.0)) throw ConfigError("train: pose step size must be positive");
  if (iterations < 1) throw ConfigError("train: iterations must be at least 1");
  if (snippet_length < 2) throw ConfigError("train: snippet length must be at least 2");
}

double depth_to_logit(double depth) {
  const double x = depth_to_sigmoid(depth);
  return std::log(x) - std::log1p(-x);
}

double logit_to_depth(double logit) { return sigmoid_to_depth(sigmoid(std::clamp(logit, -kLogitLimit, kLogitLimit))); }

DepthMap TrainState::depth(std::size_t frame) const {
  DepthMap d(width, height, 0.0, true);
  const auto& z = logits.at(frame);
  for (std::size_t i = 0; i < z.size(); ++i) d.values()[i] = logit_to_depth(z[i]);
  return d;
}

std::vector<DepthMap> TrainState::depths() const {
  std::vector<DepthMap> out;
  for (std::size_t k = 0; k < logits.size(); ++k) out.push_back(depth(k));
  return out;
}

std::vector<Twist> TrainState::twists() const {
  std::vector<Twist> out;
  for (const auto& p : pair_poses) out.push_back(se3_log(p));
  return out;
}

std::vector<double> TrainState::smoothed_totals() const {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : history) {
    best = std::min(best, r.total);
    out.push_back(best);
  }
  return out;
}

TrainState make_state(const std::vector<DepthMap>& depths, const std::vector<Pose>& pair_poses) {
  if (depths.size() < 2) throw ConfigError("train: need at least two frames");
  if (pair_poses.size() != depths.size() - 1) {
    throw ConfigError("train: expected " + std::to_string(depths.size() - 1) + " relative poses, got " +
                      std::to_string(pair_poses.size()));
  }
  TrainState s;
  s.width = depths.front().width();
  s.height = depths.front().height();
  for (const auto& d : depths) {
    if (d.width() != s.width || d.height() != s.height) throw ConfigError("train: depth sizes differ");
    std::vector<double> z(d.values().size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = depth_to_logit(std::clamp(d.values()[i], 0.1001, 99.9));
    s.logits.push_back(std::move(z));
  }
  s.pair_poses = pair_poses;
  return s;
}

TrainState initial_state(int width, int height, std::size_t n_frames, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DepthMap> depths;
  for (std::size_t k = 0; k < n_frames; ++k) {
    DepthMap d(width, height, 10.0, true);
    for (double& v : d.values()) v *= 1.0 + 0.01 * (rng.uniform() - 0.5);
    depths.push_back(std::move(d));
  }
  return make_state(depths, std::vector<Pose>(n_frames > 0 ? n_frames - 1 : 0));
}

SnippetLoss evaluate_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainState& state,
                             const TrainConfig& config) {
  const std::size_t n = frames.size();
  if (state.logits.size() != n || state.pair_poses.size() + 1 != n) {
    throw ConfigError("train: state does not match the number of frames");
  }
  const std::vector<DepthMap> depths = state.depths();
  SnippetLoss out;
  out.record.step = state.step;
  out.grad_logits.assign(n, std::vector<double>(static_cast<std::size_t>(K.pixel_count()), 0.0));
  out.grad_twists.assign(n - 1, Twist::Zero());
  std::vector<std::vector<double>> grad_depth(n, std::vector<double>(static_cast<std::size_t>(K.pixel_count()), 0.0));

  auto accumulate = [&](std::size_t a, std::size_t b, const Pose& pose_ab) {
    const LossBundle lb = total_loss(frames[a], frames[b], depths[a], depths[b], pose_ab, K, config.weights);
    out.record.total += lb.total;
    out.record.photometric += lb.masked_photometric;
    out.record.smoothness += lb.smoothness;
    out.record.geometry += lb.geometry;
    for (std::size_t i = 0; i < grad_depth[a].size(); ++i) {
      grad_depth[a][i] += lb.grad.depth_a[i];
      grad_depth[b][i] += lb.grad.depth_b[i];
    }
    return lb.grad.twist;
  };

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Pose& P = state.pair_poses[k];
    out.grad_twists[k] += accumulate(k, k + 1, P);
    if (config.bidirectional) {
      const Pose Q = P.inverse();
      const Twist g = accumulate(k + 1, k, Q);
      out.grad_twists[k] -= Q.adjoint().transpose() * g;
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    const auto& z = state.logits[k];
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double x = sigmoid(std::clamp(z[i], -kLogitLimit, kLogitLimit));
      const double D = depths[k].values()[i];
      out.grad_logits[k][i] = grad_depth[k][i] * (-kDepthSlope * D * D * x * (1.0 - x));
    }
  }
  return out;
}

TrainState optimize_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainConfig& config,
                            TrainState state) {
  config.validate();
  K.validate();
  if (frames.size() < 2) throw ConfigError("train: need at least two frames");
  for (const auto& f : frames) check_dimensions(K, f);
  if (state.width != K.width || state.height != K.height) throw ConfigError("train: state size differs from camera");

  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (const double v : frames[k].data()) {
      if (!std::isfinite(v)) {
        throw NumericalError("train: frame " + std::to_string(k) + " has a non-finite intensity at step " +
                             std::to_string(state.step));
      }
    }
  }

  const double depth_step = config.step_size * static_cast<double>(K.pixel_count());
  for (int it = 0; it < config.iterations; ++it) {
    const SnippetLoss sl = evaluate_snippet(frames, K, state, config);
    if (!std::isfinite(sl.record.total)) {
      throw NumericalError("train: loss became non-finite at step " + std::to_string(state.step));
    }
    state.history.push_back(sl.record);
    for (std::size_t k = 0; k < state.logits.size(); ++k) {
      auto& z = state.logits[k];
      for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = std::clamp(z[i] - depth_step * sl.grad_logits[k][i], -kLogitLimit, kLogitLimit);
      }
    }
    if (config.pose_mode == PoseMode::Joint) {
      for (std::size_t k = 0; k < state.pair_poses.size(); ++k) {
        state.pair_poses[k] = se3_exp(-config.pose_step_size * sl.grad_twists[k]) * state.pair_poses[k];
      }
    }
    ++state.step;
  }
  return state;
}

TrainState optimize_snippet(const std::vector<ImageGrid>& frames, const Intrinsics& K, const TrainConfig& config) {
  return optimize_snippet(frames, K, config, initial_state(K.width, K.height, frames.size(), config.seed));
}

ConsistencyProbe consistency_probe(const std::vector<DepthMap>& depths, const std::vector<DepthMap>& truth) {
  if (depths.size() != truth.size() || depths.empty()) {
    throw ConfigError("consistency_probe: need one ground-truth map per frame");
  }
  ConsistencyProbe p;
  for (std::size_t k = 0; k < depths.size(); ++k) {
    if (depths[k].pixel_count() != truth[k].pixel_count()) throw ConfigError("consistency_probe: size mismatch");
    std::vector<double> r;
    for (int i = 0; i < truth[k].pixel_count(); ++i) {
      if (!depths[k].validity()[i] || !truth[k].validity()[i] || !(truth[k].values()[i] > 0.0)) continue;
      r.push_back(depths[k].values()[i] / truth[k].values()[i]);
    }
    if (r.empty()) throw DataError("consistency_probe: frame " + std::to_string(k) + " has no valid pixels");
    p.ratios.push_back(median(std::move(r)));
  }
  const auto [lo, hi] = std::minmax_element(p.ratios.begin(), p.ratios.end());
  p.spread = *hi / *lo;
  return p;
}

}  // namespace scdepth
