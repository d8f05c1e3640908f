#include "scdepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scdepth/errors.hpp"

namespace scdepth {

PointCloud backproject(const DepthMap& depth, const Intrinsics& K) {
  check_dimensions(K, depth);
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.is_valid(x, y)) continue;
      cloud.points.push_back(pixel_ray(K, x, y) * depth.at(x, y));
    }
  }
  return cloud;
}

PointCloud transform(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.colors = cloud.colors;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(pose * p);
  return out;
}

Projection project(const PointCloud& cloud, const Intrinsics& K) {
  Projection out;
  out.coords.reserve(cloud.size());
  out.depths.reserve(cloud.size());
  out.in_front.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const bool front = p.z() > kZEps;
    out.in_front.push_back(front ? 1 : 0);
    out.depths.push_back(p.z());
    if (front) {
      out.coords.emplace_back(K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy);
    } else {
      out.coords.emplace_back(-1.0, -1.0);
    }
  }
  return out;
}

std::optional<BilinearFootprint> bilinear_footprint(double u, double v, int width, int height) {
  if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  if (fu < 0.0 || fv < 0.0 || fu + 1.0 > width - 1 || fv + 1.0 > height - 1) return std::nullopt;
  BilinearFootprint f;
  f.x0 = static_cast<int>(fu);
  f.y0 = static_cast<int>(fv);
  f.fx = u - fu;
  f.fy = v - fv;
  return f;
}

namespace {

template <typename Fetch>
void sample_one(const BilinearFootprint& f, int channels, Fetch&& fetch, double* value, Eigen::Vector2d* jac) {
  for (int c = 0; c < channels; ++c) {
    const double v00 = fetch(f.x0, f.y0, c);
    const double v10 = fetch(f.x0 + 1, f.y0, c);
    const double v01 = fetch(f.x0, f.y0 + 1, c);
    const double v11 = fetch(f.x0 + 1, f.y0 + 1, c);
    value[c] = f.w00() * v00 + f.w10() * v10 + f.w01() * v01 + f.w11() * v11;
    jac[c].x() = (1.0 - f.fy) * (v10 - v00) + f.fy * (v11 - v01);
    jac[c].y() = (1.0 - f.fx) * (v01 - v00) + f.fx * (v11 - v10);
  }
}

}  // namespace

BilinearSamples bilinear_sample(const ImageGrid& grid, std::span<const Eigen::Vector2d> coords) {
  BilinearSamples out;
  const int C = grid.channels();
  out.channels = C;
  out.values.assign(coords.size() * C, 0.0);
  out.valid.assign(coords.size(), 0);
  out.jacobian.assign(coords.size() * C, Eigen::Vector2d::Zero());
  auto fetch = [&grid](int x, int y, int c) { return grid.at(x, y, c); };
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto f = bilinear_footprint(coords[i].x(), coords[i].y(), grid.width(), grid.height());
    if (!f) continue;
    out.valid[i] = 1;
    sample_one(*f, C, fetch, &out.values[i * C], &out.jacobian[i * C]);
  }
  return out;
}

BilinearSamples bilinear_sample(const DepthMap& depth, std::span<const Eigen::Vector2d> coords) {
  BilinearSamples out;
  out.channels = 1;
  out.values.assign(coords.size(), 0.0);
  out.valid.assign(coords.size(), 0);
  out.jacobian.assign(coords.size(), Eigen::Vector2d::Zero());
  auto fetch = [&depth](int x, int y, int) { return depth.at(x, y); };
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto f = bilinear_footprint(coords[i].x(), coords[i].y(), depth.width(), depth.height());
    if (!f) continue;
    if (!depth.is_valid(f->x0, f->y0) || !depth.is_valid(f->x0 + 1, f->y0) || !depth.is_valid(f->x0, f->y0 + 1) ||
        !depth.is_valid(f->x0 + 1, f->y0 + 1)) {
      continue;
    }
    out.valid[i] = 1;
    sample_one(*f, 1, fetch, &out.values[i], &out.jacobian[i]);
  }
  return out;
}

PixelCorrespondences reproject_pixels(const DepthMap& depth_a, const Pose& pose_ab, const Intrinsics& K) {
  check_dimensions(K, depth_a);
  PixelCorrespondences c;
  c.width = K.width;
  c.height = K.height;
  const auto n = static_cast<std::size_t>(K.pixel_count());
  c.points.assign(n, Eigen::Vector3d::Zero());
  c.normalized.assign(n, Eigen::Vector3d::Zero());
  c.coords.assign(n, Eigen::Vector2d(-1.0, -1.0));
  c.in_front.assign(n, 0);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * K.width + x;
      if (!depth_a.is_valid(x, y)) continue;
      const double d = depth_a.at(x, y);
      // Divide by the source depth before projecting so a joint rescaling of
      // depth and translation produces the same floating-point coordinates.
      const Eigen::Vector3d q = pose_ab.rotation * pixel_ray(K, x, y) + pose_ab.translation / d;
      c.normalized[i] = q;
      c.points[i] = q * d;
      if (c.points[i].z() <= kZEps) continue;
      c.in_front[i] = 1;
      c.coords[i] = {K.fx * q.x() / q.z() + K.cx, K.fy * q.y() / q.z() + K.cy};
    }
  }
  return c;
}

WarpResult warp_image(const ImageGrid& image_b, const DepthMap& depth_a, const Pose& pose_ab, const Intrinsics& K) {
  check_dimensions(K, image_b);
  const PixelCorrespondences corr = reproject_pixels(depth_a, pose_ab, K);
  const BilinearSamples s = bilinear_sample(image_b, corr.coords);
  const int C = image_b.channels();
  WarpResult out{ImageGrid(K.width, K.height, C), std::vector<std::uint8_t>(corr.coords.size(), 0)};
  for (std::size_t i = 0; i < corr.coords.size(); ++i) {
    if (!corr.in_front[i] || !s.valid[i]) continue;
    out.valid[i] = 1;
    for (int c = 0; c < C; ++c) out.image.data()[i * C + c] = s.values[i * C + c];
  }
  return out;
}

DepthSynthesis synthesize_depth(const DepthMap& depth_a, const DepthMap& depth_b, const Pose& pose_ab,
                                const Intrinsics& K) {
  check_dimensions(K, depth_b);
  const PixelCorrespondences corr = reproject_pixels(depth_a, pose_ab, K);
  const BilinearSamples s = bilinear_sample(depth_b, corr.coords);
  DepthSynthesis out{DepthMap(K.width, K.height, 0.0, false), DepthMap(K.width, K.height, 0.0, false),
                     std::vector<std::uint8_t>(corr.coords.size(), 0)};
  for (std::size_t i = 0; i < corr.coords.size(); ++i) {
    if (!corr.in_front[i] || !s.valid[i]) continue;
    out.valid[i] = 1;
    out.projected.values()[i] = corr.points[i].z();
    out.projected.validity()[i] = 1;
    out.interpolated.values()[i] = s.values[i];
    out.interpolated.validity()[i] = 1;
  }
  return out;
}

double sigmoid_to_depth(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("sigmoid_to_depth: input " + std::to_string(x) + " outside (0, 1)");
  }
  return 1.0 / (kDepthSlope * x + kDepthOffset);
}

double depth_to_sigmoid(double depth) {
  if (!(depth > kMinDepth && depth < kMaxDepth)) {
    throw DomainError("depth_to_sigmoid: depth " + std::to_string(depth) + " outside (0.1, 100)");
  }
  return (1.0 / depth - kDepthOffset) / kDepthSlope;
}

DepthMap resize_bilinear(const DepthMap& depth, int width, int height) {
  if (width <= 0 || height <= 0) throw ConfigError("resize_bilinear: target size must be positive");
  DepthMap out(width, height, 0.0, false);
  const int W = depth.width();
  const int H = depth.height();
  if (W == 0 || H == 0) return out;
  const double sx = static_cast<double>(W) / width;
  const double sy = static_cast<double>(H) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = std::clamp((x + 0.5) * sx - 0.5, 0.0, W - 1.0);
      const double v = std::clamp((y + 0.5) * sy - 0.5, 0.0, H - 1.0);
      const int x0 = std::min(static_cast<int>(u), std::max(W - 2, 0));
      const int y0 = std::min(static_cast<int>(v), std::max(H - 2, 0));
      const int x1 = std::min(x0 + 1, W - 1);
      const int y1 = std::min(y0 + 1, H - 1);
      const double ax = u - x0;
      const double ay = v - y0;
      if (!depth.is_valid(x0, y0) || !depth.is_valid(x1, y0) || !depth.is_valid(x0, y1) || !depth.is_valid(x1, y1)) {
        continue;
      }
      out.at(x, y) = (1 - ax) * (1 - ay) * depth.at(x0, y0) + ax * (1 - ay) * depth.at(x1, y0) +
                     (1 - ax) * ay * depth.at(x0, y1) + ax * ay * depth.at(x1, y1);
      out.set_valid(x, y, true);
    }
  }
  return out;
}

DepthMap downsample(const DepthMap& depth) {
  DepthMap out(depth.width() / 2, depth.height() / 2, 0.0, false);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          if (!depth.is_valid(2 * x + dx, 2 * y + dy)) continue;
          sum += depth.at(2 * x + dx, 2 * y + dy);
          ++n;
        }
      }
      if (n == 4) {
        out.at(x, y) = sum / n;
        out.set_valid(x, y, true);
      }
    }
  }
  return out;
}

ImageGrid downsample(const ImageGrid& image) {
  ImageGrid out(image.width() / 2, image.height() / 2, image.channels());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = 0.25 * (image.at(2 * x, 2 * y, c) + image.at(2 * x + 1, 2 * y, c) +
                                  image.at(2 * x, 2 * y + 1, c) + image.at(2 * x + 1, 2 * y + 1, c));
      }
    }
  }
  return out;
}

}  // namespace scdepth
