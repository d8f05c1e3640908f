#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scdepth/se3.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Points with z <= kZEps are behind (or on) the camera plane.
inline constexpr double kZEps = 1e-6;

/// Depth range of the sigmoid parameterization.
inline constexpr double kMinDepth = 0.1;
inline constexpr double kMaxDepth = 100.0;

/// Unit-depth ray through pixel (x, y).
inline Eigen::Vector3d pixel_ray(const Intrinsics& K, double x, double y) {
  return {(x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0};
}

/// One 3D point per valid pixel, row-major.
PointCloud backproject(const DepthMap& depth, const Intrinsics& K);

PointCloud transform(const PointCloud& cloud, const Pose& pose);

struct Projection {
  std::vector<Eigen::Vector2d> coords;
  std::vector<double> depths;
  std::vector<std::uint8_t> in_front;
};

Projection project(const PointCloud& cloud, const Intrinsics& K);

/// Four-neighbour footprint of a continuous coordinate. Valid only when all
/// four integer neighbours lie inside [0, W-1] x [0, H-1].
struct BilinearFootprint {
  int x0 = 0;
  int y0 = 0;
  double fx = 0.0;  // fractional offsets in [0, 1)
  double fy = 0.0;

  double w00() const { return (1.0 - fx) * (1.0 - fy); }
  double w10() const { return fx * (1.0 - fy); }
  double w01() const { return (1.0 - fx) * fy; }
  double w11() const { return fx * fy; }
};

std::optional<BilinearFootprint> bilinear_footprint(double u, double v, int width, int height);

struct BilinearSamples {
  int channels = 1;
  std::vector<double> values;            // N * channels
  std::vector<std::uint8_t> valid;       // N
  std::vector<Eigen::Vector2d> jacobian; // N * channels, d value / d(u, v)
};

BilinearSamples bilinear_sample(const ImageGrid& grid, std::span<const Eigen::Vector2d> coords);

/// Samples are also invalid when any of the four neighbours is an invalid depth.
BilinearSamples bilinear_sample(const DepthMap& depth, std::span<const Eigen::Vector2d> coords);

/// Per-pixel correspondence of view a into view b: every pixel p of D_a is
/// backprojected, moved by P_ab and projected into b.
struct PixelCorrespondences {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> points;      // in frame b
  std::vector<Eigen::Vector3d> normalized;  // points divided by the depth in a
  std::vector<Eigen::Vector2d> coords;   // continuous pixel coords in b
  std::vector<std::uint8_t> in_front;    // D_a valid and z > kZEps
};

PixelCorrespondences reproject_pixels(const DepthMap& depth_a, const Pose& pose_ab, const Intrinsics& K);

struct WarpResult {
  ImageGrid image;                    // I'_a, zero outside `valid`
  std::vector<std::uint8_t> valid;    // V
};

/// Inverse warp: synthesizes view a by sampling I_b at the reprojection of every pixel of a.
WarpResult warp_image(const ImageGrid& image_b, const DepthMap& depth_a, const Pose& pose_ab, const Intrinsics& K);

struct DepthSynthesis {
  DepthMap projected;     // D^a_b: z of the transformed point
  DepthMap interpolated;  // D'_b: D_b sampled at the projection
  std::vector<std::uint8_t> valid;
};

DepthSynthesis synthesize_depth(const DepthMap& depth_a, const DepthMap& depth_b, const Pose& pose_ab,
                                const Intrinsics& K);

/// D = 1 / (a x + b) with a, b chosen so x -> 0 gives kMaxDepth and x -> 1 gives kMinDepth.
double sigmoid_to_depth(double x);

/// Inverse of sigmoid_to_depth; depth must lie strictly inside (kMinDepth, kMaxDepth).
double depth_to_sigmoid(double depth);

inline constexpr double kDepthSlope = 1.0 / kMinDepth - 1.0 / kMaxDepth;  // a
inline constexpr double kDepthOffset = 1.0 / kMaxDepth;                  // b

/// Bilinear resampling onto a new grid (pixel-center aligned); output pixels
/// touching an invalid input pixel are invalid.
DepthMap resize_bilinear(const DepthMap& depth, int width, int height);

/// 2x2 box downsampling; an output pixel is valid only when its whole block is.
DepthMap downsample(const DepthMap& depth);
ImageGrid downsample(const ImageGrid& image);

}  // namespace scdepth
