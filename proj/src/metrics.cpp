#include "scdepth/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include <Eigen/SVD>

#include "scdepth/errors.hpp"

namespace scdepth {

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

DepthEvalReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double cap) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw ConfigError("depth_metrics: prediction and ground truth sizes differ");
  }
  if (!(cap > 0.0)) throw ConfigError("depth_metrics: cap must be positive");
  std::vector<double> p;
  std::vector<double> g;
  for (int i = 0; i < gt.pixel_count(); ++i) {
    const double gv = gt.values()[i];
    const double pv = pred.values()[i];
    if (!gt.validity()[i] || !(gv > 0.0) || gv > cap) continue;
    if (!pred.validity()[i] || !(pv > 0.0) || !std::isfinite(pv)) continue;
    p.push_back(pv);
    g.push_back(gv);
  }
  if (g.empty()) throw DataError("depth_metrics: no pixel with valid ground truth in (0, cap]");

  DepthEvalReport r;
  r.n_valid = g.size();
  r.scale = median(g) / median(p);
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pv = std::clamp(p[i] * r.scale, kMinEvalDepth, cap);
    const double gv = g[i];
    const double diff = pv - gv;
    r.abs_rel += std::abs(diff) / gv;
    r.sq_rel += diff * diff / gv;
    r.rms += diff * diff;
    const double dl = std::log(pv) - std::log(gv);
    r.rms_log += dl * dl;
    r.log10 += std::abs(std::log10(pv) - std::log10(gv));
    const double ratio = std::max(pv / gv, gv / pv);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
  }
  const double n = static_cast<double>(g.size());
  r.abs_rel /= n;
  r.sq_rel /= n;
  r.rms = std::sqrt(r.rms / n);
  r.rms_log = std::sqrt(r.rms_log / n);
  r.log10 /= n;
  r.delta1 = static_cast<double>(d1) / n;
  r.delta2 = static_cast<double>(d2) / n;
  r.delta3 = static_cast<double>(d3) / n;
  return r;
}

Sim3 Sim3::inverse() const {
  Sim3 inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation) / scale;
  return inv;
}

Sim3 align_points(const std::vector<Eigen::Vector3d>& source, const std::vector<Eigen::Vector3d>& target, int dof) {
  if (dof != 6 && dof != 7) throw ConfigError("alignment: dof must be 6 or 7");
  if (source.size() != target.size()) {
    throw DataError("alignment: trajectories have different lengths (" + std::to_string(source.size()) + " vs " +
                    std::to_string(target.size()) + ")");
  }
  if (source.size() < 3) throw DataError("alignment: need at least 3 poses");
  const double n = static_cast<double>(source.size());
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_t = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= n;
  mu_t /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d ds = source[i] - mu_s;
    cov += (target[i] - mu_t) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= n;
  var_s /= n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(var_s > 0.0) || sv[1] <= 1e-12 * std::max(sv[0], 1e-300)) {
    throw DataError("alignment: degenerate geometry, positions are collinear or coincident");
  }
  Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) S(2, 2) = -1.0;

  Sim3 out;
  out.rotation = svd.matrixU() * S * svd.matrixV().transpose();
  out.scale = dof == 7 ? (sv.asDiagonal() * S).trace() / var_s : 1.0;
  out.translation = mu_t - out.scale * (out.rotation * mu_s);
  return out;
}

Sim3 align_sim3(const Trajectory& pred, const Trajectory& gt, int dof) {
  return align_points(pred.positions(), gt.positions(), dof);
}

double ate(const Trajectory& pred, const Trajectory& gt, int dof) {
  const Sim3 s = align_sim3(pred, gt, dof);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += (s * pred[i].translation - gt[i].translation).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

const std::vector<double>& kitti_segment_lengths() {
  static const std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  return lengths;
}

RelativeErrors kitti_rel_errors(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw DataError("kitti_rel_errors: trajectories have different lengths (" + std::to_string(pred.size()) +
                    " vs " + std::to_string(gt.size()) + ")");
  }
  const std::size_t n = gt.size();
  std::vector<double> dist(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) dist[i] = dist[i - 1] + (gt[i].translation - gt[i - 1].translation).norm();

  RelativeErrors out;
  double t_sum = 0.0;
  double r_sum = 0.0;
  for (std::size_t first = 0; first < n; ++first) {
    for (const double len : kitti_segment_lengths()) {
      std::size_t last = first;
      while (last < n && dist[last] <= dist[first] + len) ++last;
      if (last >= n) continue;
      const Pose delta_gt = gt[first].inverse() * gt[last];
      const Pose delta_pred = pred[first].inverse() * pred[last];
      const Pose err = delta_pred.inverse() * delta_gt;
      r_sum += rotation_angle(err.rotation) / len;
      t_sum += err.translation.norm() / len;
      ++out.n_segments;
    }
  }
  if (out.n_segments == 0) {
    throw DataError("kitti_rel_errors: ground-truth path of " + std::to_string(dist.empty() ? 0.0 : dist.back()) +
                    " m is shorter than the shortest segment (100 m)");
  }
  const double m = static_cast<double>(out.n_segments);
  out.t_err = 100.0 * t_sum / m;
  out.r_err = 100.0 * (r_sum / m) * 180.0 / std::numbers::pi;
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Eigen::Vector3d& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)), static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

}  // namespace

ConsistencyReport consistency_metrics(const PointCloud& source, const PointCloud& target, double threshold) {
  if (source.empty() || target.empty()) throw DataError("consistency_metrics: empty point cloud");
  if (!(threshold > 0.0)) throw ConfigError("consistency_metrics: threshold must be positive");

  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t i = 0; i < source.size(); ++i) grid[cell_of(source.points[i], threshold)].push_back(i);

  ConsistencyReport r;
  double sq_sum = 0.0;
  for (const auto& q : target.points) {
    const CellKey c = cell_of(q, threshold);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (const std::size_t j : it->second) best = std::min(best, (source.points[j] - q).norm());
        }
      }
    }
    if (best <= threshold) {
      ++r.n_corr;
      sq_sum += best * best;
    }
  }
  r.fitness = static_cast<double>(r.n_corr) / static_cast<double>(target.size());
  r.rmse = r.n_corr > 0 ? std::sqrt(sq_sum / static_cast<double>(r.n_corr)) : 0.0;
  return r;
}

}  // namespace scdepth
