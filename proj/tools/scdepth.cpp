// Command-line front end: synthetic data, snippet training, tracking, and evaluation.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "scdepth/errors.hpp"
#include "scdepth/geometry.hpp"
#include "scdepth/io.hpp"
#include "scdepth/metrics.hpp"
#include "scdepth/odometry.hpp"
#include "scdepth/optimizer.hpp"
#include "scdepth/oracle.hpp"

namespace fs = std::filesystem;
using namespace scdepth;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string frame_name(const std::string& prefix, int index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix.c_str(), index, ext.c_str());
  return buf;
}

// Files named prefix_NNNN.ext in `dir`, ordered by name.
std::vector<fs::path> list_frames(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix + "_", 0) == 0 && entry.path().extension() == "." + ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(double v) { return format_double(v); }

void print_table(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) std::cout << k << std::string(width - k.size() + 2, ' ') << v << '\n';
}

void log_config(const CLI::App& app) {
  std::istringstream lines(app.config_to_str(true, false));
  spdlog::info("resolved configuration for '{}':", app.get_name());
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) spdlog::info("  {}", line);
  }
}

std::map<CLI::App*, std::string> config_paths;

void add_config(CLI::App* app) {
  app->add_option("--config", config_paths[app], "key = value file; flags given explicitly take precedence");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Keys name long options without the leading dashes. Unknown keys are usage errors.
void apply_config(CLI::App* app, const std::string& path) {
  std::istringstream in(read_file(path));
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw CLI::ValidationError(where, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = key == "config" ? nullptr : app->get_option_no_throw("--" + key);
    if (!opt) throw CLI::ValidationError(where, "unknown key '" + key + "' for " + app->get_name());
    if (opt->count() > 0) continue;
    std::istringstream tokens(value);
    for (std::string tok; tokens >> tok;) opt->add_result(tok);
    opt->run_callback();
  }
}

// Required options may come from a config file, so they are checked after it is applied.
std::vector<std::pair<CLI::App*, CLI::Option*>> needed;

void need(CLI::App* app, CLI::Option* opt) { needed.emplace_back(app, opt); }

void check_needed() {
  for (const auto& [app, opt] : needed) {
    if (app->parsed() && opt->count() == 0) throw CLI::RequiredError(app->get_name() + " " + opt->get_name());
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_st("scdepth");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SCDEPTH_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string scene;
  std::string out;
  int width = 128;
  int height = 128;
  int frames = 10;
  std::uint64_t seed = 1;
  std::vector<double> motion{0.05, 0.01, 0.25, 0.004, 0.02, 0.003};
};

void run_synth(const SynthArgs& a) {
  SceneConfig cfg;
  if (!a.scene.empty()) {
    cfg = load_scene_config(a.scene);
  } else {
    if (a.motion.size() != 6) throw ConfigError("synth: --motion needs 6 values");
    const Intrinsics K = default_intrinsics(a.width, a.height);
    Twist step;
    for (int i = 0; i < 6; ++i) step[i] = a.motion[i];
    cfg.scene = default_scene(K, a.seed);
    cfg.sequence = constant_motion_sequence(K, a.frames, step);
  }
  const auto frames = render_sequence(cfg.scene, cfg.sequence);
  fs::create_directories(a.out);
  const fs::path out(a.out);
  std::vector<Pose> poses;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    write_ppm((out / frame_name("frame", static_cast<int>(k), "ppm")).string(), frames[k].image);
    write_pfm((out / frame_name("depth", static_cast<int>(k), "pfm")).string(), frames[k].depth);
    poses.push_back(frames[k].pose);
  }
  write_intrinsics((out / "intrinsics.txt").string(), cfg.sequence.intrinsics);
  write_kitti_poses((out / "poses.txt").string(), Trajectory(poses).anchored());
  print_table({{"frames", std::to_string(frames.size())},
               {"size", std::to_string(cfg.sequence.intrinsics.width) + "x" +
                            std::to_string(cfg.sequence.intrinsics.height)},
               {"output", a.out}});
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string init_depth;  // directory of depth_NNNN.pfm used as initialization
  int first = 0;
  int length = 3;
  int iterations = 2000;
  double step_size = TrainConfig{}.step_size;
  double pose_step_size = 1e-3;
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.5;
  double lambda = 0.15;
  std::uint64_t seed = 0;
  std::string pose_mode = "frozen";
  bool bidirectional = true;
  std::vector<double> init_scales;
};

void run_train(const TrainArgs& a) {
  const fs::path data(a.data);
  const Intrinsics K = read_intrinsics((data / "intrinsics.txt").string());
  const auto images = list_frames(data, "frame", "ppm");
  if (a.first < 0 || a.first + a.length > static_cast<int>(images.size())) {
    throw DataError("train: frames " + std::to_string(a.first) + ".." + std::to_string(a.first + a.length - 1) +
                    " not available (" + std::to_string(images.size()) + " images)");
  }
  TrainConfig cfg;
  cfg.weights = {a.alpha, a.beta, a.gamma, a.lambda};
  cfg.step_size = a.step_size;
  cfg.pose_step_size = a.pose_step_size;
  cfg.iterations = a.iterations;
  cfg.seed = a.seed;
  cfg.snippet_length = a.length;
  cfg.bidirectional = a.bidirectional;
  if (a.pose_mode == "frozen") {
    cfg.pose_mode = PoseMode::Frozen;
  } else if (a.pose_mode == "joint") {
    cfg.pose_mode = PoseMode::Joint;
  } else {
    throw ConfigError("train: pose mode must be 'frozen' or 'joint'");
  }
  cfg.validate();

  std::vector<ImageGrid> frames;
  for (int k = a.first; k < a.first + a.length; ++k) frames.push_back(read_ppm(images[k].string()));

  std::vector<Pose> pairs(static_cast<std::size_t>(a.length - 1));
  const fs::path pose_file = data / "poses.txt";
  if (fs::exists(pose_file)) {
    const Trajectory traj = read_kitti_poses(pose_file.string());
    if (static_cast<int>(traj.size()) < a.first + a.length) throw DataError("train: poses.txt is too short");
    for (int k = 0; k + 1 < a.length; ++k) pairs[k] = traj[a.first + k + 1].inverse() * traj[a.first + k];
  } else if (cfg.pose_mode == PoseMode::Frozen) {
    throw DataError("train: frozen pose mode needs poses.txt in " + a.data);
  }

  TrainState state = initial_state(K.width, K.height, frames.size(), cfg.seed);
  if (!a.init_depth.empty()) {
    const auto files = list_frames(a.init_depth, "depth", "pfm");
    if (static_cast<int>(files.size()) < a.first + a.length) throw DataError("train: not enough initial depth maps");
    std::vector<DepthMap> depths;
    for (int k = 0; k < a.length; ++k) {
      DepthMap d = read_pfm(files[a.first + k].string());
      if (!a.init_scales.empty()) {
        if (static_cast<int>(a.init_scales.size()) != a.length) {
          throw ConfigError("train: --init-scales needs one value per frame");
        }
        d = d.scaled(a.init_scales[k]);
      }
      depths.push_back(std::move(d));
    }
    state = make_state(depths, pairs);
  } else {
    state.pair_poses = pairs;
  }

  const TrainState result = optimize_snippet(frames, K, cfg, std::move(state));

  fs::create_directories(a.out);
  const fs::path out(a.out);
  std::ostringstream csv;
  csv << "step,total,LP,LS,LG\n";
  for (const auto& r : result.history) {
    csv << r.step << ',' << fmt(r.total) << ',' << fmt(r.photometric) << ',' << fmt(r.smoothness) << ','
        << fmt(r.geometry) << '\n';
  }
  write_file((out / "loss.csv").string(), csv.str());
  for (int k = 0; k < a.length; ++k) {
    write_pfm((out / frame_name("depth", a.first + k, "pfm")).string(), result.depth(k));
  }
  const auto& first = result.history.front();
  const auto& last = result.history.back();
  print_table({{"iterations", std::to_string(result.history.size())},
               {"total (first)", fmt(first.total)},
               {"total (last)", fmt(last.total)},
               {"LP (last)", fmt(last.photometric)},
               {"LS (last)", fmt(last.smoothness)},
               {"LG (last)", fmt(last.geometry)},
               {"output", a.out}});
}

// ---------------------------------------------------------------------------

struct TrackArgs {
  std::string data;
  std::string out;
  std::string depth_dir;  // defaults to the data directory
  std::string init = "motion";
  std::string external;
  bool use_current_depth = true;
  int max_iterations = 50;
  int levels = 3;
  double gamma = 0.5;
  double huber = 0.1;
};

void run_track(const TrackArgs& a) {
  const fs::path data(a.data);
  const Intrinsics K = read_intrinsics((data / "intrinsics.txt").string());
  const auto images = list_frames(data, "frame", "ppm");
  const auto depths = list_frames(a.depth_dir.empty() ? data : fs::path(a.depth_dir), "depth", "pfm");
  if (images.size() < 2) throw DataError("track: need at least two frames in " + a.data);
  if (depths.size() < images.size()) {
    throw DataError("track: " + std::to_string(images.size()) + " images but " + std::to_string(depths.size()) +
                    " depth maps");
  }
  std::vector<std::pair<ImageGrid, DepthMap>> frames;
  for (std::size_t k = 0; k < images.size(); ++k) {
    DepthMap d = read_pfm(depths[k].string());
    if (d.width() != K.width || d.height() != K.height) d = resize_bilinear(d, K.width, K.height);
    frames.emplace_back(read_ppm(images[k].string()), std::move(d));
  }

  OdometryOptions opt;
  opt.track.max_iterations = a.max_iterations;
  opt.track.pyramid_levels = a.levels;
  opt.track.gamma = a.gamma;
  opt.track.huber_delta = a.huber;
  opt.use_current_depth = a.use_current_depth;
  if (a.init == "motion") {
    opt.init = InitMode::MotionModel;
  } else if (a.init == "external") {
    opt.init = InitMode::External;
    if (a.external.empty()) throw ConfigError("track: --init external needs --external");
    opt.external = read_kitti_poses(a.external).relatives();
    if (opt.external.size() + 1 < frames.size()) throw DataError("track: external trajectory is too short");
    opt.external.resize(frames.size() - 1);
  } else {
    throw ConfigError("track: init must be 'motion' or 'external'");
  }

  const Trajectory traj = run_odometry(frames, K, opt);
  write_kitti_poses(a.out, traj);
  print_table({{"frames", std::to_string(traj.size())}, {"path length", fmt(traj.path_length())}, {"output", a.out}});
}

// ---------------------------------------------------------------------------

struct EvalDepthArgs {
  std::string pred;
  std::string gt;
  double cap = 80.0;
  std::string csv;
};

std::vector<fs::path> depth_inputs(const std::string& p) {
  if (fs::is_directory(p)) return list_frames(p, "depth", "pfm");
  return {fs::path(p)};
}

void run_eval_depth(const EvalDepthArgs& a) {
  const auto pred = depth_inputs(a.pred);
  std::vector<fs::path> gt;
  if (fs::is_directory(a.gt)) {
    for (const auto& p : pred) gt.push_back(fs::path(a.gt) / p.filename());
  } else {
    gt.push_back(a.gt);
  }
  if (pred.empty() || pred.size() != gt.size()) throw DataError("eval-depth: no prediction to evaluate");
  std::ostringstream csv;
  csv << "frame,abs_rel,sq_rel,rms,rms_log,log10,delta1,delta2,delta3,n_valid,scale\n";
  DepthEvalReport mean;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const DepthMap g = read_pfm(gt[k].string());
    DepthMap p = read_pfm(pred[k].string());
    if (p.width() != g.width() || p.height() != g.height()) p = resize_bilinear(p, g.width(), g.height());
    const DepthEvalReport r = depth_metrics(p, g, a.cap);
    csv << gt[k].stem().string() << ',' << fmt(r.abs_rel) << ',' << fmt(r.sq_rel) << ',' << fmt(r.rms) << ','
        << fmt(r.rms_log) << ',' << fmt(r.log10) << ',' << fmt(r.delta1) << ',' << fmt(r.delta2) << ','
        << fmt(r.delta3) << ',' << r.n_valid << ',' << fmt(r.scale) << '\n';
    mean.abs_rel += r.abs_rel;
    mean.sq_rel += r.sq_rel;
    mean.rms += r.rms;
    mean.rms_log += r.rms_log;
    mean.log10 += r.log10;
    mean.delta1 += r.delta1;
    mean.delta2 += r.delta2;
    mean.delta3 += r.delta3;
    mean.n_valid += r.n_valid;
  }
  const double n = static_cast<double>(pred.size());
  print_table({{"frames", std::to_string(pred.size())},
               {"AbsRel", fmt(mean.abs_rel / n)},
               {"SqRel", fmt(mean.sq_rel / n)},
               {"RMS", fmt(mean.rms / n)},
               {"RMSlog", fmt(mean.rms_log / n)},
               {"Log10", fmt(mean.log10 / n)},
               {"delta1", fmt(mean.delta1 / n)},
               {"delta2", fmt(mean.delta2 / n)},
               {"delta3", fmt(mean.delta3 / n)},
               {"pixels", std::to_string(mean.n_valid)}});
  if (!a.csv.empty()) write_file(a.csv, csv.str());
}

// ---------------------------------------------------------------------------

struct EvalOdomArgs {
  std::string pred;
  std::string gt;
  int dof = 7;
  std::string csv;
};

void run_eval_odom(const EvalOdomArgs& a) {
  const Trajectory pred = read_kitti_poses(a.pred);
  const Trajectory gt = read_kitti_poses(a.gt);
  const Sim3 s = align_sim3(pred, gt, a.dof);
  const double ate_rmse = ate(pred, gt, a.dof);
  std::string t_err = "n/a";
  std::string r_err = "n/a";
  try {
    const RelativeErrors rel = kitti_rel_errors(pred, gt);
    t_err = fmt(rel.t_err);
    r_err = fmt(rel.r_err);
  } catch (const DataError& e) {
    spdlog::warn("relative errors skipped: {}", e.what());
  }
  print_table({{"poses", std::to_string(pred.size())},
               {"ATE (m)", fmt(ate_rmse)},
               {"t_err (%)", t_err},
               {"r_err (deg/100m)", r_err},
               {"alignment scale", fmt(s.scale)}});
  if (!a.csv.empty()) {
    write_file(a.csv, "ate,t_err,r_err,scale\n" + fmt(ate_rmse) + ',' + t_err + ',' + r_err + ',' + fmt(s.scale) + '\n');
  }
}

// ---------------------------------------------------------------------------

struct EvalConsistencyArgs {
  std::string depths;
  std::string intrinsics;
  std::string poses;
  double threshold = 0.0;  // 0 selects 0.02 x median target depth
  std::string csv;
};

void run_eval_consistency(const EvalConsistencyArgs& a) {
  const Intrinsics K = read_intrinsics(a.intrinsics);
  const Trajectory traj = read_kitti_poses(a.poses);
  const auto files = list_frames(a.depths, "depth", "pfm");
  if (files.size() < 2) throw DataError("eval-consistency: need at least two depth maps");
  if (traj.size() < files.size()) throw DataError("eval-consistency: fewer poses than depth maps");

  auto world_cloud = [&](std::size_t k, double& median_depth) {
    DepthMap d = read_pfm(files[k].string());
    if (d.width() != K.width || d.height() != K.height) d = resize_bilinear(d, K.width, K.height);
    std::vector<double> valid;
    for (int i = 0; i < d.pixel_count(); ++i) {
      if (d.validity()[i]) valid.push_back(d.values()[i]);
    }
    median_depth = median(valid);
    return transform(backproject(d, K), traj[k]);
  };

  std::ostringstream csv;
  csv << "source,target,threshold,fitness,rmse,n_corr\n";
  double fit_sum = 0.0;
  double rmse_sum = 0.0;
  for (std::size_t k = 0; k + 1 < files.size(); ++k) {
    double med_s = 0.0;
    double med_t = 0.0;
    const PointCloud source = world_cloud(k, med_s);
    const PointCloud target = world_cloud(k + 1, med_t);
    const double thr = a.threshold > 0.0 ? a.threshold : 0.02 * med_t;
    const ConsistencyReport r = consistency_metrics(source, target, thr);
    csv << k << ',' << k + 1 << ',' << fmt(thr) << ',' << fmt(r.fitness) << ',' << fmt(r.rmse) << ',' << r.n_corr
        << '\n';
    fit_sum += r.fitness;
    rmse_sum += r.rmse;
  }
  const double n = static_cast<double>(files.size() - 1);
  print_table({{"pairs", std::to_string(files.size() - 1)},
               {"fitness (mean)", fmt(fit_sum / n)},
               {"rmse (mean)", fmt(rmse_sum / n)}});
  if (!a.csv.empty()) write_file(a.csv, csv.str());
}

// ---------------------------------------------------------------------------

struct ExportCloudArgs {
  std::string depth;
  std::string image;
  std::string intrinsics;
  std::string poses;
  int index = 0;
  std::string out;
};

void run_export_cloud(const ExportCloudArgs& a) {
  const Intrinsics K = read_intrinsics(a.intrinsics);
  const DepthMap d = read_pfm(a.depth);
  check_dimensions(K, d);
  PointCloud cloud = backproject(d, K);
  if (!a.image.empty()) {
    const ImageGrid img = read_ppm(a.image);
    check_dimensions(K, img);
    for (int i = 0; i < d.pixel_count(); ++i) {
      if (!d.validity()[i]) continue;
      const int x = i % K.width;
      const int y = i / K.width;
      const int c = img.channels();
      cloud.colors.emplace_back(img.at(x, y, 0), img.at(x, y, c == 3 ? 1 : 0), img.at(x, y, c == 3 ? 2 : 0));
    }
  }
  if (!a.poses.empty()) {
    const Trajectory traj = read_kitti_poses(a.poses);
    if (a.index < 0 || a.index >= static_cast<int>(traj.size())) throw DataError("export-cloud: pose index out of range");
    cloud = PointCloud{transform(cloud, traj[a.index]).points, cloud.colors};
  }
  write_ply(a.out, cloud);
  print_table({{"points", std::to_string(cloud.size())}, {"output", a.out}});
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Scale-consistent depth and pose estimation toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render an oracle sequence: images, depths, intrinsics, poses");
  add_config(s);
  s->add_option("--scene", synth.scene, "Scene description file");
  need(s, s->add_option("--out", synth.out, "Output directory"));
  s->add_option("--width", synth.width, "Image width (default scene)");
  s->add_option("--height", synth.height, "Image height (default scene)");
  s->add_option("--frames", synth.frames, "Number of frames (default scene)");
  s->add_option("--seed", synth.seed, "Texture seed (default scene)");
  s->add_option("--motion", synth.motion, "Per-frame twist tx ty tz wx wy wz (default scene)")->expected(6);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Optimize per-frame depth on a snippet; writes loss.csv and depth PFMs");
  add_config(t);
  need(t, t->add_option("--data", train.data, "Directory with frame_NNNN.ppm, intrinsics.txt, poses.txt"));
  need(t, t->add_option("--out", train.out, "Output directory"));
  t->add_option("--init-depth", train.init_depth, "Directory of depth_NNNN.pfm used as initialization");
  t->add_option("--init-scales", train.init_scales, "Per-frame factors applied to the initial depths");
  t->add_option("--first", train.first, "Index of the first frame");
  t->add_option("--length", train.length, "Snippet length");
  t->add_option("--iterations", train.iterations, "Gradient steps");
  t->add_option("--step-size", train.step_size, "Step on the depth logits");
  t->add_option("--pose-step-size", train.pose_step_size, "Step on the pose twists (joint mode)");
  t->add_option("--alpha", train.alpha, "Photometric weight");
  t->add_option("--beta", train.beta, "Smoothness weight");
  t->add_option("--gamma", train.gamma, "Geometry consistency weight");
  t->add_option("--lambda", train.lambda, "L1 share of the photometric term");
  t->add_option("--seed", train.seed, "Seed of the initial depth jitter");
  t->add_option("--pose-mode", train.pose_mode, "frozen or joint");
  t->add_option("--bidirectional", train.bidirectional, "Also use reversed pairs");

  TrackArgs track;
  auto* k = app.add_subcommand("track", "Frame-to-frame tracking; writes a KITTI trajectory");
  add_config(k);
  need(k, k->add_option("--data", track.data, "Directory with frame_NNNN.ppm, depth_NNNN.pfm, intrinsics.txt"));
  need(k, k->add_option("--out", track.out, "Output trajectory file"));
  k->add_option("--depth-dir", track.depth_dir, "Directory of depth_NNNN.pfm (default: --data)");
  k->add_option("--init", track.init, "motion or external");
  k->add_option("--external", track.external, "KITTI trajectory supplying external initializations");
  k->add_option("--use-current-depth", track.use_current_depth, "Mask and geometry term from the current depth");
  k->add_option("--max-iterations", track.max_iterations, "Gauss-Newton iterations per pyramid level");
  k->add_option("--levels", track.levels, "Pyramid levels");
  k->add_option("--gamma", track.gamma, "Geometry residual weight");
  k->add_option("--huber", track.huber, "Huber threshold on intensity residuals");

  EvalDepthArgs eval_depth;
  auto* ed = app.add_subcommand("eval-depth", "Depth metrics with median scaling");
  add_config(ed);
  need(ed, ed->add_option("--pred", eval_depth.pred, "Predicted PFM or directory"));
  need(ed, ed->add_option("--gt", eval_depth.gt, "Ground-truth PFM or directory"));
  ed->add_option("--cap", eval_depth.cap, "Maximum evaluated depth");
  ed->add_option("--csv", eval_depth.csv, "Per-frame CSV output");

  EvalOdomArgs eval_odom;
  auto* eo = app.add_subcommand("eval-odom", "ATE after alignment and KITTI relative errors");
  add_config(eo);
  need(eo, eo->add_option("--pred", eval_odom.pred, "Predicted KITTI trajectory"));
  need(eo, eo->add_option("--gt", eval_odom.gt, "Ground-truth KITTI trajectory"));
  eo->add_option("--dof", eval_odom.dof, "6 (rigid) or 7 (similarity) alignment");
  eo->add_option("--csv", eval_odom.csv, "CSV output");

  EvalConsistencyArgs eval_cons;
  auto* ec = app.add_subcommand("eval-consistency", "Point-cloud agreement of adjacent depth maps");
  add_config(ec);
  need(ec, ec->add_option("--depths", eval_cons.depths, "Directory of depth_NNNN.pfm"));
  need(ec, ec->add_option("--intrinsics", eval_cons.intrinsics, "Intrinsics file"));
  need(ec, ec->add_option("--poses", eval_cons.poses, "KITTI trajectory placing the clouds"));
  ec->add_option("--threshold", eval_cons.threshold, "Inlier distance (0: 0.02 x median target depth)");
  ec->add_option("--csv", eval_cons.csv, "Per-pair CSV output");

  ExportCloudArgs exp;
  auto* ex = app.add_subcommand("export-cloud", "Backproject a depth map to an ASCII PLY");
  add_config(ex);
  need(ex, ex->add_option("--depth", exp.depth, "Depth PFM"));
  need(ex, ex->add_option("--intrinsics", exp.intrinsics, "Intrinsics file"));
  ex->add_option("--image", exp.image, "PPM supplying vertex colors");
  ex->add_option("--poses", exp.poses, "KITTI trajectory; the cloud is moved to world coordinates");
  ex->add_option("--index", exp.index, "Pose index used with --poses");
  need(ex, ex->add_option("--out", exp.out, "Output PLY"));

  try {
    app.parse(argc, argv);
    for (auto& [sub, path] : config_paths) {
      if (sub->parsed() && !path.empty()) apply_config(sub, path);
    }
    check_needed();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    for (const CLI::App* sub : app.get_subcommands()) log_config(*sub);
    if (s->parsed()) run_synth(synth);
    if (t->parsed()) run_train(train);
    if (k->parsed()) run_track(track);
    if (ed->parsed()) run_eval_depth(eval_depth);
    if (eo->parsed()) run_eval_odom(eval_odom);
    if (ec->parsed()) run_eval_consistency(eval_cons);
    if (ex->parsed()) run_export_cloud(exp);
  } catch (const TrackingLostError& e) {
    spdlog::error("tracking lost at frame {}: {}", e.frame(), e.what());
    return kExitNumerical;
  } catch (const NumericalError& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return 0;
}
