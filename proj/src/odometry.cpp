#include "scdepth/odometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <spdlog/spdlog.h>

#include "scdepth/errors.hpp"
#include "scdepth/geometry.hpp"
#include "scdepth/metrics.hpp"

namespace scdepth {

double reprojection_error(const Correspondence& c, ReprojectionMode mode) {
  if (!(c.observed.z() > 0.0) || !(c.projected.z() > 0.0)) {
    throw DomainError("reprojection_error: disparities must be positive");
  }
  const Eigen::Vector3d d = c.observed - c.projected;
  const double planar = d.x() * d.x() + d.y() * d.y();
  if (mode == ReprojectionMode::Planar) return std::sqrt(planar);
  return std::sqrt(planar + d.z() * d.z());
}

Pose init_pose(InitMode mode, const Trajectory& history, const std::optional<Pose>& external) {
  if (mode == InitMode::External) {
    if (!external) throw ConfigError("init_pose: external initialization requested without a pose");
    return *external;
  }
  const std::size_t n = history.size();
  if (n < 2) return Pose::identity();
  return history[n - 2].inverse() * history[n - 1];
}

void TrackOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("track: max iterations must be at least 1");
  if (pyramid_levels < 1) throw ConfigError("track: pyramid levels must be at least 1");
  if (!(huber_delta > 0.0)) throw ConfigError("track: huber delta must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("track: gamma must be non-negative");
  if (!(convergence > 0.0)) throw ConfigError("track: convergence threshold must be positive");
}

namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;

// Catmull-Rom weights and their derivatives for fractional offset t.
void cubic_weights(double t, std::array<double, 4>& w, std::array<double, 4>& dw) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w = {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
       0.5 * (t3 - t2)};
  dw = {0.5 * (-3.0 * t2 + 4.0 * t - 1.0), 0.5 * (9.0 * t2 - 10.0 * t), 0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
        0.5 * (3.0 * t2 - 2.0 * t)};
}

// Bicubic sample and its (u, v) gradient. Requires the 4x4 neighbourhood inside the image.
struct CubicSample {
  double value;
  Eigen::RowVector2d gradient;
};

CubicSample sample_cubic(const ImageGrid& img, int x0, int y0, const std::array<double, 4>& wx,
                         const std::array<double, 4>& dwx, const std::array<double, 4>& wy,
                         const std::array<double, 4>& dwy, int c) {
  CubicSample s{0.0, Eigen::RowVector2d::Zero()};
  for (int j = 0; j < 4; ++j) {
    double row = 0.0;
    double drow = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double v = img.at(x0 - 1 + i, y0 - 1 + j, c);
      row += wx[i] * v;
      drow += dwx[i] * v;
    }
    s.value += wy[j] * row;
    s.gradient.x() += wy[j] * drow;
    s.gradient.y() += dwy[j] * row;
  }
  return s;
}

struct Level {
  Intrinsics K;
  ImageGrid cur;
  const DepthMap* cur_depth = nullptr;
  DepthMap cur_depth_store;
  std::vector<Eigen::Vector3d> points;  // previous-frame points with valid depth
  std::vector<double> intensities;      // matching previous-frame values, C per point
};

struct Evaluation {
  double cost = 0.0;  // mean over V
  std::size_t count = 0;
  double photometric = 0.0;  // mean channel-averaged |r| over V
  Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
  Vector6d b = Vector6d::Zero();
};

Evaluation evaluate(const Level& L, const Pose& P, const TrackOptions& opt, bool build) {
  Evaluation e;
  const int W = L.cur.width();
  const int Hh = L.cur.height();
  const int C = L.cur.channels();
  const double delta = opt.huber_delta;
  const bool geo = L.cur_depth != nullptr;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < L.points.size(); ++i) {
    const Eigen::Vector3d Y = P.rotation * L.points[i] + P.translation;
    if (!(Y.z() > kZEps)) continue;
    const double iz = 1.0 / Y.z();
    const double u = L.K.fx * Y.x() * iz + L.K.cx;
    const double v = L.K.fy * Y.y() * iz + L.K.cy;
    const auto f = bilinear_footprint(u, v, W, Hh);
    if (!f || f->x0 < 1 || f->y0 < 1 || f->x0 + 2 > W - 1 || f->y0 + 2 > Hh - 1) continue;

    double mask = 1.0;
    double rg = 0.0;
    Eigen::Matrix<double, 1, 3> drg_dY = Eigen::Matrix<double, 1, 3>::Zero();
    Eigen::Matrix<double, 2, 3> dpi;
    dpi << L.K.fx * iz, 0.0, -L.K.fx * Y.x() * iz * iz, 0.0, L.K.fy * iz, -L.K.fy * Y.y() * iz * iz;
    if (geo) {
      const DepthMap& D = *L.cur_depth;
      const int x0 = f->x0, y0 = f->y0;
      if (!D.is_valid(x0, y0) || !D.is_valid(x0 + 1, y0) || !D.is_valid(x0, y0 + 1) || !D.is_valid(x0 + 1, y0 + 1)) {
        continue;
      }
      const double B = f->w00() * D.at(x0, y0) + f->w10() * D.at(x0 + 1, y0) + f->w01() * D.at(x0, y0 + 1) +
                       f->w11() * D.at(x0 + 1, y0 + 1);
      const double A = Y.z();
      const double s = A + B;
      rg = (A - B) / s;
      mask = 1.0 - std::abs(rg);
      if (build) {
        const double dB_du = (1.0 - f->fy) * (D.at(x0 + 1, y0) - D.at(x0, y0)) + f->fy * (D.at(x0 + 1, y0 + 1) - D.at(x0, y0 + 1));
        const double dB_dv = (1.0 - f->fx) * (D.at(x0, y0 + 1) - D.at(x0, y0)) + f->fx * (D.at(x0 + 1, y0 + 1) - D.at(x0 + 1, y0));
        const Eigen::Matrix<double, 1, 3> dB_dY = Eigen::RowVector2d(dB_du, dB_dv) * dpi;
        Eigen::Matrix<double, 1, 3> dA_dY(0.0, 0.0, 1.0);
        drg_dY = (2.0 * B / (s * s)) * dA_dY - (2.0 * A / (s * s)) * dB_dY;
      }
    }

    ++e.count;
    Matrix36d dY;
    if (build) {
      dY.leftCols<3>().setIdentity();
      dY.rightCols<3>() = -skew(Y);
    }
    std::array<double, 4> wx, dwx, wy, dwy;
    cubic_weights(f->fx, wx, dwx);
    cubic_weights(f->fy, wy, dwy);
    double abs_pixel = 0.0;
    for (int c = 0; c < C; ++c) {
      const CubicSample cs = sample_cubic(L.cur, f->x0, f->y0, wx, dwx, wy, dwy, c);
      const double r = cs.value - L.intensities[i * C + c];
      const double a = std::abs(r);
      abs_pixel += a;
      const double w = a <= delta ? 1.0 : delta / a;
      e.cost += mask * (a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta));
      if (build) {
        const Eigen::Matrix<double, 1, 6> J = cs.gradient * dpi * dY;
        e.H.noalias() += (mask * w) * J.transpose() * J;
        e.b.noalias() += (mask * w * r) * J.transpose();
      }
    }
    abs_sum += abs_pixel / C;
    if (geo && opt.gamma > 0.0) {
      e.cost += opt.gamma * rg * rg;
      if (build) {
        const Eigen::Matrix<double, 1, 6> J = drg_dY * dY;
        e.H.noalias() += (2.0 * opt.gamma) * J.transpose() * J;
        e.b.noalias() += (2.0 * opt.gamma * rg) * J.transpose();
      }
    }
  }
  if (e.count > 0) {
    const double n = static_cast<double>(e.count);
    e.cost /= n;
    e.photometric = abs_sum / n;
    e.H /= n;
    e.b /= n;
  }
  return e;
}

Level make_level(const ImageGrid& prev, const DepthMap& prev_depth, const ImageGrid& cur, const Intrinsics& K) {
  Level L;
  L.K = K;
  L.cur = cur;
  const int C = prev.channels();
  for (int y = 0; y < prev.height(); ++y) {
    for (int x = 0; x < prev.width(); ++x) {
      if (!prev_depth.is_valid(x, y)) continue;
      L.points.push_back(pixel_ray(K, x, y) * prev_depth.at(x, y));
      for (int c = 0; c < C; ++c) L.intensities.push_back(prev.at(x, y, c));
    }
  }
  return L;
}

}  // namespace

TrackResult track_frame(const ImageGrid& prev_image, const DepthMap& prev_depth, const Pose& prev_pose,
                        const ImageGrid& cur_image, const Intrinsics& K, const Pose& init, const TrackOptions& options,
                        const DepthMap* cur_depth) {
  options.validate();
  K.validate();
  check_dimensions(K, prev_image);
  check_dimensions(K, prev_depth);
  check_dimensions(K, cur_image);
  if (cur_depth) check_dimensions(K, *cur_depth);
  if (prev_image.channels() != cur_image.channels()) throw ConfigError("track: images have different channel counts");

  std::vector<double> valid_depths;
  for (int i = 0; i < prev_depth.pixel_count(); ++i) {
    const double d = prev_depth.values()[i];
    if (prev_depth.validity()[i] && d > 0.0 && std::isfinite(d)) valid_depths.push_back(d);
  }
  if (valid_depths.size() * 5 < static_cast<std::size_t>(K.pixel_count())) {
    throw DataError("track: previous depth is valid on fewer than 20% of pixels");
  }

  // Work in units of the median previous depth so the objective and the
  // convergence test do not depend on the global depth scale.
  const double unit = median(valid_depths);
  DepthMap prev_d = prev_depth.scaled(1.0 / unit);
  for (int i = 0; i < prev_d.pixel_count(); ++i) {
    if (!(prev_d.values()[i] > 0.0) || !std::isfinite(prev_d.values()[i])) prev_d.validity()[i] = 0;
  }
  std::optional<DepthMap> cur_d;
  if (cur_depth) cur_d = cur_depth->scaled(1.0 / unit);

  std::vector<Level> levels;
  {
    ImageGrid pi = prev_image, ci = cur_image;
    DepthMap pd = prev_d;
    std::optional<DepthMap> cd = cur_d;
    Intrinsics k = K;
    for (int l = 0; l < options.pyramid_levels; ++l) {
      if (l > 0) {
        if (k.width < 32 || k.height < 32) break;
        pi = downsample(pi);
        ci = downsample(ci);
        pd = downsample(pd);
        if (cd) cd = downsample(*cd);
        k = k.half();
      }
      levels.push_back(make_level(pi, pd, ci, k));
      if (cd) levels.back().cur_depth_store = *cd;
    }
    for (auto& L : levels) {
      if (cur_d) L.cur_depth = &L.cur_depth_store;
    }
  }

  // P maps previous-camera coordinates into the current camera.
  Pose P = init.inverse();
  P.translation /= unit;

  TrackResult result;
  bool converged_finest = false;
  for (std::size_t li = levels.size(); li-- > 0;) {
    const Level& L = levels[li];
    Evaluation e = evaluate(L, P, options, true);
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      if (e.count < 6) break;
      if (!std::isfinite(e.cost)) throw TrackingLostError("track: cost became non-finite");
      ++result.iterations;
      const Vector6d delta = -e.H.ldlt().solve(e.b);
      if (!delta.allFinite()) throw TrackingLostError("track: singular normal equations");
      double step = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 10; ++halving, step *= 0.5) {
        const Pose candidate = se3_exp(step * delta) * P;
        Evaluation ce = evaluate(L, candidate, options, true);
        if (ce.count >= 6 && ce.cost < e.cost) {
          P = candidate;
          e = std::move(ce);
          accepted = true;
          break;
        }
      }
      if (!accepted || step * delta.norm() < options.convergence) {
        converged = true;
        break;
      }
    }
    if (li == 0) converged_finest = converged;
  }

  const Evaluation final_eval = evaluate(levels.front(), P, options, false);
  result.coverage = static_cast<double>(final_eval.count) / static_cast<double>(K.pixel_count());
  result.cost = final_eval.cost;
  result.converged = converged_finest;
  if (!std::isfinite(final_eval.cost)) throw TrackingLostError("track: cost became non-finite");
  if (result.coverage < options.min_coverage) {
    throw TrackingLostError("track: overlap collapsed to " + std::to_string(100.0 * result.coverage) + "% of the image");
  }
  if (final_eval.photometric > options.max_photometric) {
    throw TrackingLostError("track: mean photometric residual " + std::to_string(final_eval.photometric) +
                            " exceeds " + std::to_string(options.max_photometric));
  }

  P.translation *= unit;
  result.relative = P.inverse();
  result.pose = prev_pose * result.relative;
  return result;
}

Trajectory run_odometry(const std::vector<std::pair<ImageGrid, DepthMap>>& frames, const Intrinsics& K,
                        const OdometryOptions& options) {
  if (frames.size() < 2) throw ConfigError("odometry: need at least two frames");
  if (options.init == InitMode::External && options.external.size() + 1 != frames.size()) {
    throw ConfigError("odometry: external initialization needs " + std::to_string(frames.size() - 1) +
                      " relative poses, got " + std::to_string(options.external.size()));
  }
  Trajectory traj;
  traj.append(0, Pose::identity());
  for (std::size_t t = 1; t < frames.size(); ++t) {
    std::optional<Pose> ext;
    if (options.init == InitMode::External) ext = options.external[t - 1];
    const Pose init = init_pose(options.init, traj, ext);
    const auto& [prev_img, prev_depth] = frames[t - 1];
    const auto& [cur_img, cur_depth] = frames[t];
    try {
      const TrackResult r = track_frame(prev_img, prev_depth, traj[t - 1], cur_img, K, init, options.track,
                                        options.use_current_depth ? &cur_depth : nullptr);
      spdlog::debug("frame {}: {} iterations, cost {:.3g}, coverage {:.3f}", t, r.iterations, r.cost, r.coverage);
      traj.append(static_cast<int>(t), r.pose);
    } catch (const TrackingLostError& e) {
      throw TrackingLostError("frame " + std::to_string(t) + ": " + e.what(), static_cast<int>(t));
    }
  }
  return traj;
}

}  // namespace scdepth
