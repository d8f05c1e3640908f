#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace scdepth {

/// Pinhole camera. Pixel (x, y) addresses column x and row y; integer
/// coordinates are pixel centers.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws ConfigError unless fx, fy > 0 and the principal point lies in the image.
  void validate() const;

  /// Intrinsics of the image downsampled by 2 with 2x2 box averaging.
  Intrinsics half() const;

  int pixel_count() const { return width * height; }
};

/// Dense H x W x C field of intensities in [0, 1], channels interleaved.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  int pixel_count() const { return width_ * height_; }

  double& at(int x, int y, int c) { return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c]; }
  double at(int x, int y, int c) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const ImageGrid& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Dense H x W depth field with per-pixel validity.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, double fill = 0.0, bool valid = true);

  int width() const { return width_; }
  int height() const { return height_; }
  int pixel_count() const { return width_ * height_; }

  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  bool is_valid(int x, int y) const { return valid_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set_valid(int x, int y, bool v) { valid_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<std::uint8_t>& validity() { return valid_; }
  const std::vector<std::uint8_t>& validity() const { return valid_; }

  std::size_t valid_count() const;

  /// Copy with every value multiplied by s.
  DepthMap scaled(double s) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  /// Empty, or one RGB triple per point.
  std::vector<Eigen::Vector3d> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Throws ConfigError unless the depth map and image have the camera's size.
void check_dimensions(const Intrinsics& K, const DepthMap& depth);
void check_dimensions(const Intrinsics& K, const ImageGrid& image);

}  // namespace scdepth
