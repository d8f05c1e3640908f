#include "scdepth/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "scdepth/errors.hpp"
#include "scdepth/se3.hpp"

namespace scdepth {

namespace {

// Whitespace/comment-aware header tokenizer for the netpbm family.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) {
      throw ParseError(std::string("header: missing ") + what + " at byte offset " + std::to_string(start));
    }
    return bytes_.substr(start, pos_ - start);
  }

  int integer(const char* what) {
    const std::size_t at = pos_;
    const std::string tok = token(what);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("header: invalid ") + what + " '" + tok + "' near byte offset " +
                       std::to_string(at));
    }
    return v;
  }

  double real(const char* what) {
    const std::size_t at = pos_;
    const std::string tok = token(what);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("header: invalid ") + what + " '" + tok + "' near byte offset " +
                       std::to_string(at));
    }
    return v;
  }

  // Consumes the single whitespace byte that terminates the header.
  std::size_t end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("header: expected whitespace before payload at byte offset " + std::to_string(pos_));
    }
    return ++pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

float read_float(const char* p, bool little_endian) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if ((std::endian::native == std::endian::little) != little_endian) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

void append_float_le(std::string& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
  char buf[4];
  std::memcpy(buf, &bits, 4);
  out.append(buf, 4);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ImageGrid decode_ppm(const std::string& bytes) {
  HeaderReader h(bytes);
  const std::string magic = h.token("magic number");
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw ParseError("ppm: unsupported magic '" + magic + "' at byte offset 0 (expected P6 or P5)");
  }
  const int width = h.integer("width");
  const int height = h.integer("height");
  const int maxval = h.integer("maxval");
  if (width <= 0 || height <= 0) throw ParseError("ppm: non-positive image size");
  if (maxval != 255) throw ParseError("ppm: maxval " + std::to_string(maxval) + " unsupported (expected 255)");
  const std::size_t offset = h.end_of_header();
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  const std::size_t actual = bytes.size() - offset;
  if (actual < expected) {
    throw ParseError("ppm: truncated payload, expected " + std::to_string(expected) + " bytes after offset " +
                     std::to_string(offset) + ", got " + std::to_string(actual));
  }
  ImageGrid img(width, height, channels);
  for (std::size_t i = 0; i < expected; ++i) {
    img.data()[i] = static_cast<unsigned char>(bytes[offset + i]) / 255.0;
  }
  return img;
}

std::string encode_ppm(const ImageGrid& image) {
  std::string out = (image.channels() == 3 ? "P6\n" : "P5\n") + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.data().size());
  for (const double v : image.data()) {
    const double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

ImageGrid read_ppm(const std::string& path) { return decode_ppm(read_file(path)); }
void write_ppm(const std::string& path, const ImageGrid& image) { write_file(path, encode_ppm(image)); }

DepthMap decode_pfm(const std::string& bytes) {
  HeaderReader h(bytes);
  const std::string magic = h.token("magic number");
  if (magic != "Pf") {
    throw ParseError("pfm: unsupported magic '" + magic + "' at byte offset 0 (expected grayscale Pf)");
  }
  const int width = h.integer("width");
  const int height = h.integer("height");
  const double scale = h.real("scale");
  if (width <= 0 || height <= 0) throw ParseError("pfm: non-positive image size");
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError("pfm: invalid scale");
  const bool little = scale < 0.0;
  const std::size_t offset = h.end_of_header();
  const std::size_t expected = static_cast<std::size_t>(width) * height * 4;
  const std::size_t actual = bytes.size() - offset;
  if (actual < expected) {
    throw ParseError("pfm: truncated payload, expected " + std::to_string(expected) + " bytes after offset " +
                     std::to_string(offset) + ", got " + std::to_string(actual));
  }
  DepthMap d(width, height, 0.0, true);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      const float v = read_float(bytes.data() + offset + (static_cast<std::size_t>(row) * width + x) * 4, little);
      if (std::isfinite(v)) {
        d.at(x, y) = v;
      } else {
        d.at(x, y) = 0.0;
        d.set_valid(x, y, false);
      }
    }
  }
  return d;
}

std::string encode_pfm(const DepthMap& depth) {
  std::string out = "Pf\n" + std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n-1.0\n";
  out.reserve(out.size() + static_cast<std::size_t>(depth.pixel_count()) * 4);
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      const float v = depth.is_valid(x, y) ? static_cast<float>(depth.at(x, y)) : std::numeric_limits<float>::quiet_NaN();
      append_float_le(out, v);
    }
  }
  return out;
}

DepthMap read_pfm(const std::string& path) { return decode_pfm(read_file(path)); }
void write_pfm(const std::string& path, const DepthMap& depth) { write_file(path, encode_pfm(depth)); }

Trajectory parse_kitti_poses(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Trajectory traj;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("poses line " + std::to_string(line_no) + ": '" + tok + "' is not a number");
      }
      v.push_back(x);
    }
    if (v.size() != 12) {
      throw ParseError("poses line " + std::to_string(line_no) + ": expected 12 values, got " +
                       std::to_string(v.size()));
    }
    Pose p;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[r * 4 + c];
      p.translation[r] = v[r * 4 + 3];
    }
    const double drift = orthonormality_error(p.rotation);
    if (drift > 1e-6) {
      spdlog::warn("poses line {}: rotation is {:.3g} from orthonormal, projecting to the nearest rotation",
                   line_no, drift);
      p.rotation = nearest_rotation(p.rotation);
    }
    traj.append(static_cast<int>(traj.size()), p);
  }
  return traj;
}

std::string format_kitti_poses(const Trajectory& trajectory) {
  std::string out;
  for (const Pose& p : trajectory.poses()) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double v = c < 3 ? p.rotation(r, c) : p.translation[r];
        if (r != 0 || c != 0) out.push_back(' ');
        out += format_double(v);
      }
    }
    out.push_back('\n');
  }
  return out;
}

Trajectory read_kitti_poses(const std::string& path) { return parse_kitti_poses(read_file(path)); }
void write_kitti_poses(const std::string& path, const Trajectory& trajectory) {
  write_file(path, format_kitti_poses(trajectory));
}

Intrinsics parse_intrinsics(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError("intrinsics: '" + tok + "' is not a number");
    }
    v.push_back(x);
  }
  if (v.size() != 6) {
    throw ParseError("intrinsics: expected 'width height fx fy cx cy', got " + std::to_string(v.size()) + " values");
  }
  if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) throw ParseError("intrinsics: size must be integral");
  Intrinsics K;
  K.width = static_cast<int>(v[0]);
  K.height = static_cast<int>(v[1]);
  K.fx = v[2];
  K.fy = v[3];
  K.cx = v[4];
  K.cy = v[5];
  K.validate();
  return K;
}

Intrinsics read_intrinsics(const std::string& path) { return parse_intrinsics(read_file(path)); }

void write_intrinsics(const std::string& path, const Intrinsics& K) {
  write_file(path, std::to_string(K.width) + " " + std::to_string(K.height) + " " + format_double(K.fx) + " " +
                       format_double(K.fy) + " " + format_double(K.cx) + " " + format_double(K.cy) + "\n");
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  const bool color = cloud.colors.size() == cloud.points.size() && !cloud.points.empty();
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n";
  if (color) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out += format_double(static_cast<float>(p.x())) + " " + format_double(static_cast<float>(p.y())) + " " +
           format_double(static_cast<float>(p.z()));
    if (color) {
      for (int c = 0; c < 3; ++c) {
        out += " " + std::to_string(static_cast<int>(std::round(std::clamp(cloud.colors[i][c], 0.0, 1.0) * 255.0)));
      }
    }
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace scdepth
