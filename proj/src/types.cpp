#include "scdepth/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scdepth/errors.hpp"

namespace scdepth {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ConfigError("intrinsics: focal lengths must be positive (fx=" + std::to_string(fx) +
                      ", fy=" + std::to_string(fy) + ")");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ConfigError("intrinsics: principal point (" + std::to_string(cx) + ", " + std::to_string(cy) +
                      ") outside " + std::to_string(width) + "x" + std::to_string(height) + " image");
  }
}

Intrinsics Intrinsics::half() const {
  Intrinsics k;
  k.fx = fx * 0.5;
  k.fy = fy * 0.5;
  k.cx = (cx + 0.5) * 0.5 - 0.5;
  k.cy = (cy + 0.5) * 0.5 - 0.5;
  k.width = width / 2;
  k.height = height / 2;
  k.cx = std::clamp(k.cx, 0.0, k.width - 1e-9);
  k.cy = std::clamp(k.cy, 0.0, k.height - 1e-9);
  return k;
}

ImageGrid::ImageGrid(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw ConfigError("image: invalid shape " + std::to_string(width) + "x" + std::to_string(height) + "x" +
                      std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

DepthMap::DepthMap(int width, int height, double fill, bool valid) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw ConfigError("depth map: negative size");
  }
  values_.assign(static_cast<std::size_t>(width) * height, fill);
  valid_.assign(static_cast<std::size_t>(width) * height, valid ? 1 : 0);
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

DepthMap DepthMap::scaled(double s) const {
  DepthMap out = *this;
  for (double& v : out.values_) v *= s;
  return out;
}

void check_dimensions(const Intrinsics& K, const DepthMap& depth) {
  if (depth.width() != K.width || depth.height() != K.height) {
    throw ConfigError("depth map is " + std::to_string(depth.width()) + "x" + std::to_string(depth.height()) +
                      " but camera is " + std::to_string(K.width) + "x" + std::to_string(K.height));
  }
}

void check_dimensions(const Intrinsics& K, const ImageGrid& image) {
  if (image.width() != K.width || image.height() != K.height) {
    throw ConfigError("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                      " but camera is " + std::to_string(K.width) + "x" + std::to_string(K.height));
  }
}

}  // namespace scdepth
