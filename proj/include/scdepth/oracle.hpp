#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scdepth/se3.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Infinite plane {X : normal . X = offset} in world coordinates carrying a
/// procedural texture.
struct TexturedPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 10.0;
  std::uint64_t texture_seed = 0;
};

/// Fronto-parallel quad at world depth `depth` covering `rect` (x0, y0, x1, y1)
/// as seen by a camera at the world origin, translated by frame * velocity.
struct MovingPatch {
  Eigen::Vector4d rect = Eigen::Vector4d::Zero();
  double depth = 5.0;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  std::uint64_t texture_seed = 0;
};

struct SceneSpec {
  std::vector<TexturedPlane> planes;
  std::vector<MovingPatch> patches;
  /// Adds a fronto-parallel plane z = background_depth when positive.
  double background_depth = 0.0;
  std::uint64_t background_seed = 0;
  /// Base angular frequency of the texture in radians per scene unit.
  double texture_frequency = 2.0;
  int channels = 3;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

struct SequenceSpec {
  Intrinsics intrinsics;
  /// World-from-camera pose of every frame.
  std::vector<Pose> poses;

  int n_frames() const { return static_cast<int>(poses.size()); }
};

struct RenderedFrame {
  ImageGrid image;
  DepthMap depth;
  Pose pose;
};

/// Exact ray casting. Throws ConfigError when a ray misses every surface or
/// hits outside the depth range [0.5, 50].
std::pair<ImageGrid, DepthMap> render(const SceneSpec& scene, const Pose& pose, const Intrinsics& K,
                                      int frame_index = 0);

/// Renders every frame; patches move by frame_index * velocity. Throws
/// ConfigError when consecutive frames rotate by 10 degrees or more, or
/// translate by 10% of the median depth or more.
std::vector<RenderedFrame> render_sequence(const SceneSpec& scene, const SequenceSpec& seq);

/// Frames related by a constant world-from-camera increment: T_{k+1} = T_k exp(step).
SequenceSpec constant_motion_sequence(const Intrinsics& K, int n_frames, const Twist& step,
                                      const Pose& start = Pose::identity());

/// Camera looking down +z at a pinhole with the given size and a roughly 60
/// degree horizontal field of view.
Intrinsics default_intrinsics(int width, int height);

/// A back wall, a floor, and a side wall, textured with wavelengths that
/// stay well above the pixel pitch at the given resolution.
SceneSpec default_scene(const Intrinsics& K, std::uint64_t seed = 1);

/// Scene and sequence parsed from a key = value text file.
struct SceneConfig {
  SceneSpec scene;
  SequenceSpec sequence;
};

/// Grammar (one entry per line, '#' starts a comment):
///   width, height, fx, fy, cx, cy     camera (fx/cx default from size)
///   frames = N                        sequence length
///   motion = tx ty tz wx wy wz        per-frame twist (world-from-camera increment)
///   plane = nx ny nz offset seed      repeatable
///   patch = x0 y0 x1 y1 depth vx vy vz seed   repeatable
///   background_depth, texture_frequency, channels, noise_sigma, seed
/// Unknown keys are rejected. With no plane lines the default scene is used.
SceneConfig parse_scene_config(const std::string& text);
SceneConfig load_scene_config(const std::string& path);

}  // namespace scdepth
