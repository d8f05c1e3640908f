#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scdepth/geometry.hpp"
#include "scdepth/se3.hpp"
#include "scdepth/types.hpp"

namespace scdepth {

/// Weights of L = alpha * L_P^M + beta * L_S + gamma * L_G, the photometric
/// L1/SSIM blend lambda, and the SSIM stabilizers.
struct LossWeights {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.5;
  double lambda = 0.15;
  double c1 = 0.0001;
  double c2 = 0.0009;

  void validate() const;
};

/// Per-pixel SSIM over 3x3 windows. `defined` is set where the window lies
/// inside the image and, when a mask is supplied, inside the mask.
struct SsimMap {
  std::vector<double> values;
  std::vector<std::uint8_t> defined;
};

SsimMap ssim_map(const ImageGrid& x, const ImageGrid& y, std::span<const std::uint8_t> mask = {},
                 double c1 = 0.0001, double c2 = 0.0009);

struct PhotometricResult {
  double loss = 0.0;
  std::vector<double> per_pixel;        // lambda * L1 + (1 - lambda) * (1 - SSIM) / 2
  std::vector<std::uint8_t> support;    // pixels of V whose SSIM window is defined
};

/// Mean over the supported part of V. Throws NoOverlapError when nothing is supported.
PhotometricResult photometric_loss(const ImageGrid& image_a, const ImageGrid& warped_a,
                                   std::span<const std::uint8_t> valid, const LossWeights& weights);

/// Edge-aware smoothness: sum over forward differences of (exp(-|dI|) * dD)^2,
/// normalized by pixel count.
double smoothness_loss(const DepthMap& depth_a, const ImageGrid& image_a);

/// |A - B| / (A + B) evaluated as a function of the ratios A/d and B/d.
double normalized_depth_difference(double projected, double interpolated);

struct DepthInconsistency {
  std::vector<double> diff;             // D_diff, 0 outside `valid`
  std::vector<std::uint8_t> valid;
  DepthSynthesis synthesis;
};

DepthInconsistency depth_inconsistency(const DepthMap& depth_a, const DepthMap& depth_b, const Pose& pose_ab,
                                       const Intrinsics& K);

/// Mean of D_diff over V. Throws NoOverlapError on an empty V.
double geometry_consistency_loss(std::span<const double> diff, std::span<const std::uint8_t> valid);

std::vector<double> self_discovered_mask(std::span<const double> diff);

/// 1 where the warp explains I_a strictly better (per-pixel L1) than the
/// unwarped source; 0 elsewhere and outside V.
std::vector<std::uint8_t> auto_mask(const ImageGrid& image_a, const ImageGrid& image_b, const ImageGrid& warped_a,
                                    std::span<const std::uint8_t> valid);

/// Mean of M_s * photometric over {V, M_a = 1}. Throws NoOverlapError when fully masked.
double masked_photometric_loss(std::span<const double> photometric, std::span<const double> self_mask,
                               std::span<const std::uint8_t> valid, std::span<const std::uint8_t> auto_mask);

/// Gradient of one scalar w.r.t. every depth pixel of both views and the
/// left-multiplied twist of P_ab (P <- exp(xi) P).
struct LossGradient {
  std::vector<double> depth_a;
  std::vector<double> depth_b;
  Twist twist = Twist::Zero();
};

/// Masks supplied here replace the computed ones. The gradient never flows
/// through masks, so freezing them reproduces the function the analytic
/// gradient differentiates.
struct FrozenMasks {
  std::vector<double> self_mask;
  std::vector<std::uint8_t> auto_mask;
};

struct LossOptions {
  bool gradients = true;
  bool term_gradients = false;
  const FrozenMasks* frozen = nullptr;
};

struct LossBundle {
  double total = 0.0;
  double photometric = 0.0;         // L_P, unmasked, over the same points as L_P^M
  double masked_photometric = 0.0;  // L_P^M
  double smoothness = 0.0;          // L_S
  double geometry = 0.0;            // L_G

  std::vector<double> photometric_map;
  std::vector<double> depth_diff;
  std::vector<double> self_mask;
  std::vector<std::uint8_t> auto_mask;
  std::vector<std::uint8_t> valid;                // V
  std::vector<std::uint8_t> photometric_support;  // V, M_a = 1, SSIM window inside V
  std::vector<std::uint8_t> geometry_support;     // V, M_a = 1

  LossGradient grad;  // of total

  // Filled when LossOptions::term_gradients is set.
  std::optional<LossGradient> grad_photometric;
  std::optional<LossGradient> grad_masked_photometric;
  std::optional<LossGradient> grad_smoothness;
  std::optional<LossGradient> grad_geometry;

  FrozenMasks masks() const { return {self_mask, auto_mask}; }
};

/// Forward pass of the full objective for reference view a and source view b,
/// with analytic gradients. Throws NoOverlapError when a loss support is empty.
LossBundle total_loss(const ImageGrid& image_a, const ImageGrid& image_b, const DepthMap& depth_a,
                      const DepthMap& depth_b, const Pose& pose_ab, const Intrinsics& K,
                      const LossWeights& weights = {}, const LossOptions& options = {});

}  // namespace scdepth
