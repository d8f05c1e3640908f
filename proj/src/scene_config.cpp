#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scdepth/errors.hpp"
#include "scdepth/oracle.hpp"

namespace scdepth {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> numbers(const std::string& value, std::size_t expected, const std::string& key, int line) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("scene config line " + std::to_string(line) + ": '" + tok + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw ParseError("scene config line " + std::to_string(line) + ": '" + key + "' expects " +
                     std::to_string(expected) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace

SceneConfig parse_scene_config(const std::string& text) {
  int width = 64;
  int height = 64;
  std::optional<double> fx, fy, cx, cy;
  int frames = 3;
  Twist motion = Twist::Zero();
  std::uint64_t seed = 1;
  SceneSpec scene;
  std::optional<double> texture_frequency;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ParseError("scene config line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    auto one = [&] { return numbers(value, 1, key, line)[0]; };
    if (key == "width") {
      width = static_cast<int>(one());
    } else if (key == "height") {
      height = static_cast<int>(one());
    } else if (key == "fx") {
      fx = one();
    } else if (key == "fy") {
      fy = one();
    } else if (key == "cx") {
      cx = one();
    } else if (key == "cy") {
      cy = one();
    } else if (key == "frames") {
      frames = static_cast<int>(one());
    } else if (key == "motion") {
      const auto v = numbers(value, 6, key, line);
      for (int i = 0; i < 6; ++i) motion[i] = v[i];
    } else if (key == "plane") {
      const auto v = numbers(value, 5, key, line);
      scene.planes.push_back({Eigen::Vector3d(v[0], v[1], v[2]), v[3], static_cast<std::uint64_t>(v[4])});
    } else if (key == "patch") {
      const auto v = numbers(value, 9, key, line);
      scene.patches.push_back({Eigen::Vector4d(v[0], v[1], v[2], v[3]), v[4], Eigen::Vector3d(v[5], v[6], v[7]),
                               static_cast<std::uint64_t>(v[8])});
    } else if (key == "background_depth") {
      scene.background_depth = one();
    } else if (key == "texture_frequency") {
      texture_frequency = one();
    } else if (key == "channels") {
      scene.channels = static_cast<int>(one());
    } else if (key == "noise_sigma") {
      scene.noise_sigma = one();
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(one());
    } else {
      throw ParseError("scene config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }

  Intrinsics K = default_intrinsics(width, height);
  if (fx) K.fx = *fx;
  if (fy) K.fy = *fy;
  if (cx) K.cx = *cx;
  if (cy) K.cy = *cy;
  K.validate();

  SceneConfig cfg;
  if (scene.planes.empty() && scene.background_depth <= 0.0) {
    SceneSpec def = default_scene(K, seed);
    scene.planes = def.planes;
    if (!texture_frequency) texture_frequency = def.texture_frequency;
  }
  if (texture_frequency) scene.texture_frequency = *texture_frequency;
  scene.background_seed = seed + 100;
  scene.noise_seed = seed;
  cfg.scene = scene;
  cfg.sequence = constant_motion_sequence(K, frames, motion);
  return cfg;
}

SceneConfig load_scene_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open scene config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scene_config(ss.str());
}

}  // namespace scdepth
