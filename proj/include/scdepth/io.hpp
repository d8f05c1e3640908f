#pragma once

#include <string>
#include <vector>

#include "scdepth/trajectory.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Binary PPM (P6) or PGM (P5) with maxval 255; values map linearly to [0, 1].
ImageGrid read_ppm(const std::string& path);
ImageGrid decode_ppm(const std::string& bytes);
/// Writes P6 for 3-channel grids and P5 for single-channel grids.
void write_ppm(const std::string& path, const ImageGrid& image);
std::string encode_ppm(const ImageGrid& image);

/// Grayscale "Pf" float map. Written little-endian (scale -1.0) with rows
/// bottom-up and NaN for invalid pixels; big-endian files are accepted on read.
DepthMap read_pfm(const std::string& path);
DepthMap decode_pfm(const std::string& bytes);
void write_pfm(const std::string& path, const DepthMap& depth);
std::string encode_pfm(const DepthMap& depth);

/// KITTI pose file: one row-major 3x4 [R|t] per line. Rotations drifting
/// more than 1e-6 from orthonormal are projected back with a warning.
Trajectory read_kitti_poses(const std::string& path);
Trajectory parse_kitti_poses(const std::string& text);
void write_kitti_poses(const std::string& path, const Trajectory& trajectory);
std::string format_kitti_poses(const Trajectory& trajectory);

/// "width height fx fy cx cy" on one line.
Intrinsics read_intrinsics(const std::string& path);
Intrinsics parse_intrinsics(const std::string& text);
void write_intrinsics(const std::string& path, const Intrinsics& K);

/// ASCII PLY with optional per-vertex colors.
void write_ply(const std::string& path, const PointCloud& cloud);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace scdepth
