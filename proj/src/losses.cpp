#include "scdepth/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "scdepth/errors.hpp"

namespace scdepth {

namespace {

constexpr int kWindow = 9;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

bool window_inside(std::span<const std::uint8_t> mask, int x, int y, int W, int H) {
  if (x < 1 || y < 1 || x > W - 2 || y > H - 2) return false;
  if (mask.empty()) return true;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (!mask[static_cast<std::size_t>(y + dy) * W + (x + dx)]) return false;
    }
  }
  return true;
}

// SSIM terms for one channel of one 3x3 window.
struct SsimTerms {
  double mu_x, mu_y, var_x, var_y, cov;
  double A, B, C, D;  // numerator and denominator factors
  double value() const { return (A * B) / (C * D); }
};

SsimTerms ssim_terms(const std::array<double, kWindow>& xs, const std::array<double, kWindow>& ys, double c1,
                     double c2) {
  SsimTerms t{};
  for (int k = 0; k < kWindow; ++k) {
    t.mu_x += xs[k];
    t.mu_y += ys[k];
  }
  t.mu_x /= kWindow;
  t.mu_y /= kWindow;
  for (int k = 0; k < kWindow; ++k) {
    const double dx = xs[k] - t.mu_x;
    const double dy = ys[k] - t.mu_y;
    t.var_x += dx * dx;
    t.var_y += dy * dy;
    t.cov += dx * dy;
  }
  t.var_x /= kWindow;
  t.var_y /= kWindow;
  t.cov /= kWindow;
  t.A = 2.0 * t.mu_x * t.mu_y + c1;
  t.B = 2.0 * t.cov + c2;
  t.C = t.mu_x * t.mu_x + t.mu_y * t.mu_y + c1;
  t.D = t.var_x + t.var_y + c2;
  return t;
}

// d SSIM / d y_k for every window element.
std::array<double, kWindow> ssim_gradient_y(const SsimTerms& t, const std::array<double, kWindow>& xs,
                                            const std::array<double, kWindow>& ys) {
  std::array<double, kWindow> g{};
  const double s = t.value();
  const double n = kWindow;
  for (int k = 0; k < kWindow; ++k) {
    g[k] = s * ((2.0 * t.mu_x / n) / t.A + (2.0 * (xs[k] - t.mu_x) / n) / t.B - (2.0 * t.mu_y / n) / t.C -
                (2.0 * (ys[k] - t.mu_y) / n) / t.D);
  }
  return g;
}

void gather_window(const ImageGrid& img, int x, int y, int c, std::array<double, kWindow>& out) {
  int k = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) out[k++] = img.at(x + dx, y + dy, c);
  }
}

double mean_abs_diff(const ImageGrid& a, const ImageGrid& b, std::size_t i) {
  const int C = a.channels();
  double s = 0.0;
  for (int c = 0; c < C; ++c) s += std::abs(a.data()[i * C + c] - b.data()[i * C + c]);
  return s / C;
}

// Forward quantities shared by the scalar losses and the backward pass.
struct Forward {
  int W = 0;
  int H = 0;
  int C = 0;
  PixelCorrespondences corr;
  std::vector<BilinearFootprint> footprint;
  std::vector<std::uint8_t> valid;
  ImageGrid warped;
  std::vector<Eigen::Vector2d> image_jac;  // N * C
  std::vector<double> ratio_b;             // D'_b / D_a(p)
  std::vector<Eigen::Vector2d> depth_jac;  // d D'_b / d(u, v)
  std::vector<double> diff;
};

Forward run_forward(const ImageGrid& image_b, const DepthMap& depth_a, const DepthMap& depth_b, const Pose& pose_ab,
                    const Intrinsics& K) {
  Forward f;
  f.W = K.width;
  f.H = K.height;
  f.C = image_b.channels();
  const std::size_t N = static_cast<std::size_t>(K.pixel_count());
  f.corr = reproject_pixels(depth_a, pose_ab, K);
  f.footprint.assign(N, {});
  f.valid.assign(N, 0);
  f.warped = ImageGrid(f.W, f.H, f.C);
  f.image_jac.assign(N * f.C, Eigen::Vector2d::Zero());
  f.ratio_b.assign(N, 0.0);
  f.depth_jac.assign(N, Eigen::Vector2d::Zero());
  f.diff.assign(N, 0.0);

  for (std::size_t i = 0; i < N; ++i) {
    if (!f.corr.in_front[i]) continue;
    const auto fp = bilinear_footprint(f.corr.coords[i].x(), f.corr.coords[i].y(), f.W, f.H);
    if (!fp) continue;
    const int x0 = fp->x0;
    const int y0 = fp->y0;
    if (!depth_b.is_valid(x0, y0) || !depth_b.is_valid(x0 + 1, y0) || !depth_b.is_valid(x0, y0 + 1) ||
        !depth_b.is_valid(x0 + 1, y0 + 1)) {
      continue;
    }
    f.valid[i] = 1;
    f.footprint[i] = *fp;
    for (int c = 0; c < f.C; ++c) {
      const double v00 = image_b.at(x0, y0, c);
      const double v10 = image_b.at(x0 + 1, y0, c);
      const double v01 = image_b.at(x0, y0 + 1, c);
      const double v11 = image_b.at(x0 + 1, y0 + 1, c);
      f.warped.data()[i * f.C + c] = fp->w00() * v00 + fp->w10() * v10 + fp->w01() * v01 + fp->w11() * v11;
      f.image_jac[i * f.C + c] = {(1.0 - fp->fy) * (v10 - v00) + fp->fy * (v11 - v01),
                                  (1.0 - fp->fx) * (v01 - v00) + fp->fx * (v11 - v10)};
    }
    const double d = depth_a.values()[i];
    const double r00 = depth_b.at(x0, y0) / d;
    const double r10 = depth_b.at(x0 + 1, y0) / d;
    const double r01 = depth_b.at(x0, y0 + 1) / d;
    const double r11 = depth_b.at(x0 + 1, y0 + 1) / d;
    f.ratio_b[i] = fp->w00() * r00 + fp->w10() * r10 + fp->w01() * r01 + fp->w11() * r11;
    const double b00 = depth_b.at(x0, y0);
    const double b10 = depth_b.at(x0 + 1, y0);
    const double b01 = depth_b.at(x0, y0 + 1);
    const double b11 = depth_b.at(x0 + 1, y0 + 1);
    f.depth_jac[i] = {(1.0 - fp->fy) * (b10 - b00) + fp->fy * (b11 - b01),
                      (1.0 - fp->fx) * (b01 - b00) + fp->fx * (b11 - b10)};
    f.diff[i] = normalized_depth_difference(f.corr.normalized[i].z(), f.ratio_b[i]);
  }
  return f;
}

// Per-pixel photometric value; requires the SSIM window inside V.
double photometric_at(const ImageGrid& image_a, const ImageGrid& warped, int x, int y, const LossWeights& w) {
  const int C = image_a.channels();
  const std::size_t i = static_cast<std::size_t>(y) * image_a.width() + x;
  std::array<double, kWindow> xs{};
  std::array<double, kWindow> ys{};
  double ssim = 0.0;
  for (int c = 0; c < C; ++c) {
    gather_window(image_a, x, y, c, xs);
    gather_window(warped, x, y, c, ys);
    ssim += ssim_terms(xs, ys, w.c1, w.c2).value();
  }
  ssim /= C;
  return w.lambda * mean_abs_diff(image_a, warped, i) + (1.0 - w.lambda) * 0.5 * (1.0 - ssim);
}

void smoothness_gradient(const DepthMap& depth, const ImageGrid& image, double coef, std::vector<double>& grad) {
  const int W = depth.width();
  const int H = depth.height();
  const int C = image.channels();
  const double norm = 1.0 / (static_cast<double>(W) * H);
  auto edge_weight = [&](int x0, int y0, int x1, int y1) {
    double g = 0.0;
    for (int c = 0; c < C; ++c) g += std::abs(image.at(x1, y1, c) - image.at(x0, y0, c));
    return std::exp(-g / C);
  };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!depth.is_valid(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (x + 1 < W && depth.is_valid(x + 1, y)) {
        const double w = edge_weight(x, y, x + 1, y);
        const double g = coef * norm * 2.0 * w * w * (depth.at(x + 1, y) - depth.at(x, y));
        grad[i + 1] += g;
        grad[i] -= g;
      }
      if (y + 1 < H && depth.is_valid(x, y + 1)) {
        const double w = edge_weight(x, y, x, y + 1);
        const double g = coef * norm * 2.0 * w * w * (depth.at(x, y + 1) - depth.at(x, y));
        grad[i + W] += g;
        grad[i] -= g;
      }
    }
  }
}

// Accumulates the gradient of
//   sum_p photo_coef(p) * photometric(p) + sum_p diff_coef(p) * D_diff(p) + smooth_coef * L_S.
LossGradient backward(const Forward& f, const ImageGrid& image_a, const DepthMap& depth_a, const DepthMap& depth_b,
                      const Pose& pose_ab, const Intrinsics& K, const LossWeights& w,
                      const std::vector<double>& photo_coef, const std::vector<double>& diff_coef,
                      double smooth_coef) {
  const std::size_t N = static_cast<std::size_t>(f.W) * f.H;
  const int C = f.C;
  LossGradient out;
  out.depth_a.assign(N, 0.0);
  out.depth_b.assign(N, 0.0);

  // d loss / d warped image.
  std::vector<double> g_img(N * C, 0.0);
  std::array<double, kWindow> xs{};
  std::array<double, kWindow> ys{};
  for (int y = 0; y < f.H; ++y) {
    for (int x = 0; x < f.W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * f.W + x;
      const double coef = photo_coef[i];
      if (coef == 0.0) continue;
      for (int c = 0; c < C; ++c) {
        const double r = f.warped.data()[i * C + c] - image_a.data()[i * C + c];
        g_img[i * C + c] += coef * w.lambda / C * sign(r);
      }
      const double d_ssim = -coef * (1.0 - w.lambda) * 0.5 / C;
      for (int c = 0; c < C; ++c) {
        gather_window(image_a, x, y, c, xs);
        gather_window(f.warped, x, y, c, ys);
        const auto g = ssim_gradient_y(ssim_terms(xs, ys, w.c1, w.c2), xs, ys);
        int k = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            g_img[(static_cast<std::size_t>(y + dy) * f.W + (x + dx)) * C + c] += d_ssim * g[k++];
          }
        }
      }
    }
  }

  // Chain through sampling, projection and the rigid transform.
  for (int y = 0; y < f.H; ++y) {
    for (int x = 0; x < f.W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * f.W + x;
      if (!f.valid[i]) continue;
      Eigen::Vector2d g_uv = Eigen::Vector2d::Zero();
      for (int c = 0; c < C; ++c) g_uv += g_img[i * C + c] * f.image_jac[i * C + c];

      const double d = depth_a.values()[i];
      const Eigen::Vector3d Y = f.corr.points[i];
      double g_A = 0.0;
      const double dc = diff_coef[i];
      if (dc != 0.0) {
        const double A = Y.z();
        const double B = f.ratio_b[i] * d;
        const double s = sign(A - B);
        const double denom = (A + B) * (A + B);
        g_A = dc * s * 2.0 * B / denom;
        const double g_B = -dc * s * 2.0 * A / denom;
        g_uv += g_B * f.depth_jac[i];
        const auto& fp = f.footprint[i];
        const std::size_t j = static_cast<std::size_t>(fp.y0) * f.W + fp.x0;
        out.depth_b[j] += g_B * fp.w00();
        out.depth_b[j + 1] += g_B * fp.w10();
        out.depth_b[j + f.W] += g_B * fp.w01();
        out.depth_b[j + f.W + 1] += g_B * fp.w11();
      }
      if (g_uv.isZero(0.0) && g_A == 0.0) continue;

      const double iz = 1.0 / Y.z();
      Eigen::Vector3d g_Y(g_uv.x() * K.fx * iz, g_uv.y() * K.fy * iz,
                          -(g_uv.x() * K.fx * Y.x() + g_uv.y() * K.fy * Y.y()) * iz * iz + g_A);
      out.depth_a[i] += g_Y.dot(pose_ab.rotation * pixel_ray(K, x, y));
      out.twist.head<3>() += g_Y;
      out.twist.tail<3>() += Y.cross(g_Y);
    }
  }

  if (smooth_coef != 0.0) smoothness_gradient(depth_a, image_a, smooth_coef, out.depth_a);
  (void)depth_b;
  return out;
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
    throw ConfigError("loss weights alpha, beta, gamma must be nonnegative");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("loss weight lambda must lie in [0, 1]");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("SSIM constants must be positive");
}

SsimMap ssim_map(const ImageGrid& x, const ImageGrid& y, std::span<const std::uint8_t> mask, double c1, double c2) {
  if (!x.same_shape(y)) throw ConfigError("ssim_map: image shapes differ");
  const int W = x.width();
  const int H = x.height();
  const int C = x.channels();
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(W) * H) {
    throw ConfigError("ssim_map: mask size does not match image");
  }
  SsimMap out{std::vector<double>(static_cast<std::size_t>(W) * H, 0.0),
              std::vector<std::uint8_t>(static_cast<std::size_t>(W) * H, 0)};
  std::array<double, kWindow> xs{};
  std::array<double, kWindow> ys{};
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      if (!window_inside(mask, u, v, W, H)) continue;
      double s = 0.0;
      for (int c = 0; c < C; ++c) {
        gather_window(x, u, v, c, xs);
        gather_window(y, u, v, c, ys);
        s += ssim_terms(xs, ys, c1, c2).value();
      }
      const std::size_t i = static_cast<std::size_t>(v) * W + u;
      out.values[i] = s / C;
      out.defined[i] = 1;
    }
  }
  return out;
}

PhotometricResult photometric_loss(const ImageGrid& image_a, const ImageGrid& warped_a,
                                   std::span<const std::uint8_t> valid, const LossWeights& weights) {
  if (!image_a.same_shape(warped_a)) throw ConfigError("photometric_loss: image shapes differ");
  const int W = image_a.width();
  const int H = image_a.height();
  if (valid.size() != static_cast<std::size_t>(W) * H) throw ConfigError("photometric_loss: mask size mismatch");
  PhotometricResult out;
  out.per_pixel.assign(valid.size(), 0.0);
  out.support.assign(valid.size(), 0);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!valid[i] || !window_inside(valid, x, y, W, H)) continue;
      out.per_pixel[i] = photometric_at(image_a, warped_a, x, y, weights);
      out.support[i] = 1;
      sum += out.per_pixel[i];
      ++n;
    }
  }
  if (n == 0) throw NoOverlapError("photometric_loss: no overlap between the views");
  out.loss = sum / static_cast<double>(n);
  return out;
}

double smoothness_loss(const DepthMap& depth_a, const ImageGrid& image_a) {
  const int W = depth_a.width();
  const int H = depth_a.height();
  if (image_a.width() != W || image_a.height() != H) throw ConfigError("smoothness_loss: size mismatch");
  const int C = image_a.channels();
  auto edge_weight = [&](int x0, int y0, int x1, int y1) {
    double g = 0.0;
    for (int c = 0; c < C; ++c) g += std::abs(image_a.at(x1, y1, c) - image_a.at(x0, y0, c));
    return std::exp(-g / C);
  };
  double sum = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!depth_a.is_valid(x, y)) continue;
      if (x + 1 < W && depth_a.is_valid(x + 1, y)) {
        const double t = edge_weight(x, y, x + 1, y) * (depth_a.at(x + 1, y) - depth_a.at(x, y));
        sum += t * t;
      }
      if (y + 1 < H && depth_a.is_valid(x, y + 1)) {
        const double t = edge_weight(x, y, x, y + 1) * (depth_a.at(x, y + 1) - depth_a.at(x, y));
        sum += t * t;
      }
    }
  }
  return sum / (static_cast<double>(W) * H);
}

double normalized_depth_difference(double projected, double interpolated) {
  return std::abs(projected - interpolated) / (projected + interpolated);
}

DepthInconsistency depth_inconsistency(const DepthMap& depth_a, const DepthMap& depth_b, const Pose& pose_ab,
                                       const Intrinsics& K) {
  check_dimensions(K, depth_b);
  const ImageGrid dummy(K.width, K.height, 1);
  Forward f = run_forward(dummy, depth_a, depth_b, pose_ab, K);
  DepthInconsistency out;
  out.diff = std::move(f.diff);
  out.valid = f.valid;
  out.synthesis = synthesize_depth(depth_a, depth_b, pose_ab, K);
  return out;
}

double geometry_consistency_loss(std::span<const double> diff, std::span<const std::uint8_t> valid) {
  if (diff.size() != valid.size()) throw ConfigError("geometry_consistency_loss: size mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (!valid[i]) continue;
    sum += diff[i];
    ++n;
  }
  if (n == 0) throw NoOverlapError("geometry_consistency_loss: no overlap between the views");
  return sum / static_cast<double>(n);
}

std::vector<double> self_discovered_mask(std::span<const double> diff) {
  std::vector<double> m(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) m[i] = 1.0 - diff[i];
  return m;
}

std::vector<std::uint8_t> auto_mask(const ImageGrid& image_a, const ImageGrid& image_b, const ImageGrid& warped_a,
                                    std::span<const std::uint8_t> valid) {
  if (!image_a.same_shape(image_b) || !image_a.same_shape(warped_a)) {
    throw ConfigError("auto_mask: image shapes differ");
  }
  if (valid.size() != static_cast<std::size_t>(image_a.pixel_count())) {
    throw ConfigError("auto_mask: mask size mismatch");
  }
  std::vector<std::uint8_t> m(valid.size(), 0);
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    m[i] = mean_abs_diff(image_a, warped_a, i) < mean_abs_diff(image_a, image_b, i) ? 1 : 0;
  }
  return m;
}

double masked_photometric_loss(std::span<const double> photometric, std::span<const double> self_mask,
                               std::span<const std::uint8_t> valid, std::span<const std::uint8_t> auto_mask) {
  const std::size_t n_px = photometric.size();
  if (self_mask.size() != n_px || valid.size() != n_px || auto_mask.size() != n_px) {
    throw ConfigError("masked_photometric_loss: map sizes differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_px; ++i) {
    if (!valid[i] || !auto_mask[i]) continue;
    sum += self_mask[i] * photometric[i];
    ++n;
  }
  if (n == 0) throw NoOverlapError("masked_photometric_loss: every valid pixel is masked out");
  return sum / static_cast<double>(n);
}

LossBundle total_loss(const ImageGrid& image_a, const ImageGrid& image_b, const DepthMap& depth_a,
                      const DepthMap& depth_b, const Pose& pose_ab, const Intrinsics& K, const LossWeights& weights,
                      const LossOptions& options) {
  weights.validate();
  check_dimensions(K, image_a);
  check_dimensions(K, image_b);
  check_dimensions(K, depth_a);
  check_dimensions(K, depth_b);
  if (image_a.channels() != image_b.channels()) throw ConfigError("total_loss: channel counts differ");

  const Forward f = run_forward(image_b, depth_a, depth_b, pose_ab, K);
  const std::size_t N = static_cast<std::size_t>(K.pixel_count());
  const int W = K.width;
  const int H = K.height;

  LossBundle out;
  out.valid = f.valid;
  out.depth_diff = f.diff;

  if (options.frozen) {
    if (options.frozen->self_mask.size() != N || options.frozen->auto_mask.size() != N) {
      throw ConfigError("total_loss: frozen masks have the wrong size");
    }
    out.self_mask = options.frozen->self_mask;
    out.auto_mask = options.frozen->auto_mask;
  } else {
    out.self_mask.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      if (f.valid[i]) out.self_mask[i] = 1.0 - f.diff[i];
    }
    out.auto_mask = auto_mask(image_a, image_b, f.warped, f.valid);
  }

  out.photometric_map.assign(N, 0.0);
  out.photometric_support.assign(N, 0);
  out.geometry_support.assign(N, 0);
  double sum_p = 0.0;
  double sum_pm = 0.0;
  double sum_g = 0.0;
  std::size_t n_p = 0;
  std::size_t n_g = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!f.valid[i]) continue;
      const bool window = window_inside(f.valid, x, y, W, H);
      if (window) out.photometric_map[i] = photometric_at(image_a, f.warped, x, y, weights);
      if (!out.auto_mask[i]) continue;
      out.geometry_support[i] = 1;
      sum_g += f.diff[i];
      ++n_g;
      if (!window) continue;
      out.photometric_support[i] = 1;
      sum_p += out.photometric_map[i];
      sum_pm += out.self_mask[i] * out.photometric_map[i];
      ++n_p;
    }
  }
  if (n_g == 0 || n_p == 0) {
    throw NoOverlapError("total_loss: no pixel survives projection and auto-masking (|V| = " +
                         std::to_string(std::count(f.valid.begin(), f.valid.end(), std::uint8_t{1})) + ")");
  }
  out.photometric = sum_p / static_cast<double>(n_p);
  out.masked_photometric = sum_pm / static_cast<double>(n_p);
  out.geometry = sum_g / static_cast<double>(n_g);
  out.smoothness = smoothness_loss(depth_a, image_a);
  out.total = weights.alpha * out.masked_photometric + weights.beta * out.smoothness + weights.gamma * out.geometry;

  if (!options.gradients && !options.term_gradients) return out;

  const double inv_p = 1.0 / static_cast<double>(n_p);
  const double inv_g = 1.0 / static_cast<double>(n_g);
  std::vector<double> zero(N, 0.0);
  std::vector<double> photo_plain(N, 0.0);
  std::vector<double> photo_masked(N, 0.0);
  std::vector<double> diff_coef(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (out.photometric_support[i]) {
      photo_plain[i] = inv_p;
      photo_masked[i] = out.self_mask[i] * inv_p;
    }
    if (out.geometry_support[i]) diff_coef[i] = inv_g;
  }

  if (options.gradients) {
    std::vector<double> photo_total(N);
    std::vector<double> diff_total(N);
    for (std::size_t i = 0; i < N; ++i) {
      photo_total[i] = weights.alpha * photo_masked[i];
      diff_total[i] = weights.gamma * diff_coef[i];
    }
    out.grad = backward(f, image_a, depth_a, depth_b, pose_ab, K, weights, photo_total, diff_total, weights.beta);
  }
  if (options.term_gradients) {
    out.grad_photometric = backward(f, image_a, depth_a, depth_b, pose_ab, K, weights, photo_plain, zero, 0.0);
    out.grad_masked_photometric =
        backward(f, image_a, depth_a, depth_b, pose_ab, K, weights, photo_masked, zero, 0.0);
    out.grad_smoothness = backward(f, image_a, depth_a, depth_b, pose_ab, K, weights, zero, zero, 1.0);
    out.grad_geometry = backward(f, image_a, depth_a, depth_b, pose_ab, K, weights, zero, diff_coef, 0.0);
  }
  return out;
}

}  // namespace scdepth
