#include "scdepth/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "scdepth/errors.hpp"
#include "scdepth/geometry.hpp"
#include "scdepth/random.hpp"

namespace scdepth {

namespace {

constexpr double kSceneMinDepth = 0.5;
constexpr double kSceneMaxDepth = 50.0;
constexpr int kWaves = 3;
constexpr double kAmplitude = 0.14;

// Solid texture: three sinusoids over world coordinates, one phase set per
// channel. Wave directions stay near the face diagonals of the unit cube so
// every axis-aligned-ish plane sees at least two of them.
class Texture {
 public:
  Texture(std::uint64_t seed, double frequency) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    const std::array<Eigen::Vector3d, kWaves> axes{Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(0, 1, 1),
                                                   Eigen::Vector3d(1, 0, 1)};
    for (int i = 0; i < kWaves; ++i) {
      Eigen::Vector3d dir = axes[i].normalized();
      dir += 0.2 * Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      if (rng.uniform() < 0.5) dir.x() = -dir.x();
      k_[i] = dir.normalized() * frequency * rng.uniform(0.8, 1.2);
      for (int c = 0; c < 3; ++c) phase_[i][c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
  }

  double value(const Eigen::Vector3d& X, int channel) const {
    double v = 0.5;
    for (int i = 0; i < kWaves; ++i) v += kAmplitude * std::sin(k_[i].dot(X) + phase_[i][channel]);
    return v;
  }

 private:
  std::array<Eigen::Vector3d, kWaves> k_;
  std::array<std::array<double, 3>, kWaves> phase_{};
};

struct Surface {
  Eigen::Vector3d normal;  // unit
  double offset;
  Texture texture;
  // Patch only: rectangle bounds in plane x/y before displacement.
  bool bounded = false;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  Eigen::Vector3d displacement = Eigen::Vector3d::Zero();
};

Surface make_plane(const TexturedPlane& p, double frequency) {
  const double n = p.normal.norm();
  if (!(n > 0.0)) throw ConfigError("scene: plane normal must be nonzero");
  return Surface{p.normal / n, p.offset / n, Texture(p.texture_seed, frequency)};
}

std::vector<Surface> build_surfaces(const SceneSpec& scene, const Intrinsics& K, int frame) {
  std::vector<Surface> out;
  for (const auto& p : scene.planes) out.push_back(make_plane(p, scene.texture_frequency));
  if (scene.background_depth > 0.0) {
    out.push_back(make_plane({Eigen::Vector3d::UnitZ(), scene.background_depth, scene.background_seed},
                             scene.texture_frequency));
  }
  for (const auto& patch : scene.patches) {
    if (!(patch.depth > 0.0)) throw ConfigError("scene: patch depth must be positive");
    const Eigen::Vector3d shift = patch.velocity * static_cast<double>(frame);
    Surface s = make_plane({Eigen::Vector3d::UnitZ(), patch.depth + shift.z(), patch.texture_seed},
                           scene.texture_frequency);
    s.bounded = true;
    s.xmin = (patch.rect[0] - K.cx) / K.fx * patch.depth;
    s.xmax = (patch.rect[2] - K.cx) / K.fx * patch.depth;
    s.ymin = (patch.rect[1] - K.cy) / K.fy * patch.depth;
    s.ymax = (patch.rect[3] - K.cy) / K.fy * patch.depth;
    s.displacement = shift;
    out.push_back(std::move(s));
  }
  return out;
}

double sequence_median_depth(const DepthMap& d) {
  std::vector<double> v;
  v.reserve(d.pixel_count());
  for (int i = 0; i < d.pixel_count(); ++i) {
    if (d.validity()[i]) v.push_back(d.values()[i]);
  }
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

std::pair<ImageGrid, DepthMap> render(const SceneSpec& scene, const Pose& pose, const Intrinsics& K,
                                      int frame_index) {
  K.validate();
  if (scene.channels != 1 && scene.channels != 3) throw ConfigError("scene: channels must be 1 or 3");
  const std::vector<Surface> surfaces = build_surfaces(scene, K, frame_index);
  if (surfaces.empty()) throw ConfigError("scene: no surfaces");

  ImageGrid image(K.width, K.height, scene.channels);
  DepthMap depth(K.width, K.height, 0.0, true);
  const Eigen::Vector3d origin = pose.translation;
  std::optional<Rng> noise;
  if (scene.noise_sigma > 0.0) noise.emplace(scene.noise_seed * 1000003ULL + static_cast<std::uint64_t>(frame_index));

  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      // With a unit-z camera ray the ray parameter equals the camera-frame depth.
      const Eigen::Vector3d dir = pose.rotation * pixel_ray(K, x, y);
      double best = std::numeric_limits<double>::infinity();
      const Surface* hit = nullptr;
      for (const auto& s : surfaces) {
        const double denom = s.normal.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double t = (s.offset - s.normal.dot(origin)) / denom;
        if (!(t > 0.0) || t >= best) continue;
        if (s.bounded) {
          const Eigen::Vector3d X = origin + t * dir - s.displacement;
          if (X.x() < s.xmin || X.x() > s.xmax || X.y() < s.ymin || X.y() > s.ymax) continue;
        }
        best = t;
        hit = &s;
      }
      if (!hit) {
        throw ConfigError("scene: ray through pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") misses every surface");
      }
      if (best < kSceneMinDepth || best > kSceneMaxDepth) {
        throw ConfigError("scene: depth " + std::to_string(best) + " at pixel (" + std::to_string(x) + ", " +
                          std::to_string(y) + ") outside [0.5, 50]");
      }
      depth.at(x, y) = best;
      const Eigen::Vector3d X = origin + best * dir - hit->displacement;
      for (int c = 0; c < scene.channels; ++c) {
        double v = hit->texture.value(X, scene.channels == 1 ? 0 : c);
        if (noise) v += scene.noise_sigma * noise->normal();
        image.at(x, y, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return {std::move(image), std::move(depth)};
}

std::vector<RenderedFrame> render_sequence(const SceneSpec& scene, const SequenceSpec& seq) {
  std::vector<RenderedFrame> frames;
  frames.reserve(seq.poses.size());
  for (int k = 0; k < seq.n_frames(); ++k) {
    auto [image, depth] = render(scene, seq.poses[k], seq.intrinsics, k);
    if (k > 0) {
      const Pose rel = seq.poses[k - 1].inverse() * seq.poses[k];
      const double angle = rotation_angle(rel.rotation) * 180.0 / std::numbers::pi;
      const double median = sequence_median_depth(frames.back().depth);
      if (angle >= 10.0) {
        throw ConfigError("sequence: frame " + std::to_string(k) + " rotates " + std::to_string(angle) +
                          " degrees from its predecessor (limit 10)");
      }
      if (rel.translation.norm() >= 0.1 * median) {
        throw ConfigError("sequence: frame " + std::to_string(k) + " translates " +
                          std::to_string(rel.translation.norm()) + ", at least 10% of the median depth " +
                          std::to_string(median));
      }
    }
    frames.push_back({std::move(image), std::move(depth), seq.poses[k]});
  }
  return frames;
}

SequenceSpec constant_motion_sequence(const Intrinsics& K, int n_frames, const Twist& step, const Pose& start) {
  if (n_frames < 1) throw ConfigError("sequence: need at least one frame");
  SequenceSpec seq{K, {}};
  const Pose inc = se3_exp(step);
  Pose current = start;
  for (int k = 0; k < n_frames; ++k) {
    seq.poses.push_back(current);
    current = current * inc;
  }
  return seq;
}

Intrinsics default_intrinsics(int width, int height) {
  Intrinsics K;
  K.width = width;
  K.height = height;
  K.fx = 0.866 * width;
  K.fy = K.fx;
  K.cx = 0.5 * (width - 1);
  K.cy = 0.5 * (height - 1);
  return K;
}

SceneSpec default_scene(const Intrinsics& K, std::uint64_t seed) {
  SceneSpec scene;
  // Wavelength of roughly 32 pixels on a surface 10 units away.
  const double pixel_pitch = 10.0 / K.fx;
  scene.texture_frequency = 2.0 * std::numbers::pi / (32.0 * pixel_pitch);
  // One shared texture keeps intensity continuous across the creases.
  scene.planes.push_back({Eigen::Vector3d(0.15, -0.1, 1.0), 11.0, seed});
  scene.planes.push_back({Eigen::Vector3d(0.0, -1.0, -0.05), -3.0, seed});
  scene.planes.push_back({Eigen::Vector3d(1.0, 0.0, -0.1), -5.0, seed});
  return scene;
}

}  // namespace scdepth
