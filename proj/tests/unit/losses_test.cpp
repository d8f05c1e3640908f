#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "scdepth/errors.hpp"
#include "scdepth/losses.hpp"
#include "scdepth/oracle.hpp"
#include "scdepth/random.hpp"

using namespace scdepth;

namespace {

ImageGrid random_image(Rng& rng, int w, int h, int c) {
  ImageGrid g(w, h, c);
  for (double& v : g.data()) v = rng.uniform();
  return g;
}

double dyadic(double v) { return std::ldexp(std::round(std::ldexp(v, 40)), -40); }

struct OraclePair {
  Intrinsics K;
  ImageGrid ia, ib;
  DepthMap da, db;
  Pose pab;
  SceneSpec scene;
  Pose pose_b;
};

OraclePair oracle_pair(int size, std::uint64_t seed) {
  OraclePair p;
  p.K = default_intrinsics(size, size);
  const SceneSpec scene = default_scene(p.K, seed);
  Twist step;
  step << 0.05, 0.01, 0.25, 0.004, 0.02, 0.003;
  const Pose b = se3_exp(step);
  std::tie(p.ia, p.da) = render(scene, Pose::identity(), p.K);
  std::tie(p.ib, p.db) = render(scene, b, p.K);
  p.pab = b.inverse();
  p.scene = scene;
  p.pose_b = b;
  return p;
}

}  // namespace

TEST_CASE("ssim of identical images is one") {
  Rng rng(1);
  const ImageGrid g = random_image(rng, 8, 6, 3);
  const SsimMap s = ssim_map(g, g);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.defined[i]) CHECK(s.values[i] == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("ssim of constant zero against constant one") {
  const SsimMap s = ssim_map(ImageGrid(5, 5, 1, 0.0), ImageGrid(5, 5, 1, 1.0));
  const double c1 = 0.0001;
  CHECK(s.values[12] == doctest::Approx(c1 / (1 + c1)).epsilon(1e-12));
  CHECK(s.values[12] == doctest::Approx(9.999e-5).epsilon(1e-4));
}

TEST_CASE("ssim matches the per-window reference on random 9x9 pairs") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int C = trial % 2 ? 3 : 1;
    const ImageGrid x = random_image(rng, 9, 9, C);
    const ImageGrid y = random_image(rng, 9, 9, C);
    const SsimMap s = ssim_map(x, y);
    for (int v = 0; v < 9; ++v) {
      for (int u = 0; u < 9; ++u) {
        const bool inside = u >= 1 && v >= 1 && u <= 7 && v <= 7;
        CHECK(static_cast<bool>(s.defined[v * 9 + u]) == inside);
        if (!inside) continue;
        double ref = 0.0;
        for (int c = 0; c < C; ++c) {
          double a[9], b[9];
          for (int k = 0; k < 9; ++k) {
            a[k] = x.at(u + k % 3 - 1, v + k / 3 - 1, c);
            b[k] = y.at(u + k % 3 - 1, v + k / 3 - 1, c);
          }
          ref += oracle::window_ssim(a, b, 0.0001, 0.0009) / C;
        }
        CHECK(std::abs(s.values[v * 9 + u] - ref) < 1e-10);
      }
    }
  }
}

TEST_CASE("ssim windows respect the mask") {
  Rng rng(3);
  const ImageGrid x = random_image(rng, 6, 6, 1);
  std::vector<std::uint8_t> mask(36, 1);
  mask[2 * 6 + 2] = 0;
  const SsimMap s = ssim_map(x, x, mask);
  CHECK(s.defined[1 * 6 + 1] == 0);
  CHECK(s.defined[3 * 6 + 3] == 0);
  CHECK(s.defined[4 * 6 + 4] == 1);
}

TEST_CASE("photometric loss closed forms") {
  Rng rng(4);
  const ImageGrid a = random_image(rng, 6, 6, 3);
  std::vector<std::uint8_t> all(36, 1);
  CHECK(photometric_loss(a, a, all, {}).loss == doctest::Approx(0.0).epsilon(1e-15));

  LossWeights l1;
  l1.lambda = 1.0;
  CHECK(photometric_loss(ImageGrid(6, 6, 3, 0.0), ImageGrid(6, 6, 3, 0.5), all, l1).loss == 0.5);

  CHECK_THROWS_AS(photometric_loss(a, a, std::vector<std::uint8_t>(36, 0), {}), NoOverlapError);
}

TEST_CASE("photometric loss on a crafted 5x5 pair is the term-by-term blend") {
  Rng rng(5);
  const ImageGrid a = random_image(rng, 5, 5, 3);
  const ImageGrid b = random_image(rng, 5, 5, 3);
  std::vector<std::uint8_t> all(25, 1);
  const PhotometricResult r = photometric_loss(a, b, all, {});
  double sum = 0.0;
  int n = 0;
  for (int v = 1; v <= 3; ++v) {
    for (int u = 1; u <= 3; ++u) {
      double l1 = 0.0, ssim = 0.0;
      for (int c = 0; c < 3; ++c) {
        l1 += std::abs(a.at(u, v, c) - b.at(u, v, c)) / 3.0;
        double x[9], y[9];
        for (int k = 0; k < 9; ++k) {
          x[k] = a.at(u + k % 3 - 1, v + k / 3 - 1, c);
          y[k] = b.at(u + k % 3 - 1, v + k / 3 - 1, c);
        }
        ssim += oracle::window_ssim(x, y, 0.0001, 0.0009) / 3.0;
      }
      const double p = 0.15 * l1 + 0.85 * (1.0 - ssim) / 2.0;
      CHECK(std::abs(r.per_pixel[v * 5 + u] - p) < 1e-12);
      CHECK(r.support[v * 5 + u] == 1);
      sum += p;
      ++n;
    }
  }
  CHECK(std::abs(r.loss - sum / n) < 1e-12);
  CHECK(r.support[0] == 0);
}

TEST_CASE("smoothness loss") {
  Rng rng(6);
  const ImageGrid flat(8, 8, 3, 0.3);
  CHECK(smoothness_loss(DepthMap(8, 8, 4.0), flat) == 0.0);

  auto ramp = [](double slope) {
    DepthMap d(8, 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) d.at(x, y) = 1.0 + slope * x;
    return d;
  };
  const double s1 = smoothness_loss(ramp(0.5), flat);
  CHECK(s1 > 0.0);
  CHECK(smoothness_loss(ramp(1.5), flat) == doctest::Approx(9.0 * s1).epsilon(1e-13));
  // Constant image: 8 rows x 7 horizontal differences of the slope over 64 pixels.
  CHECK(s1 == doctest::Approx(8 * 7 * 0.25 / 64.0).epsilon(1e-14));

  DepthMap step(8, 8, 2.0);
  ImageGrid edge(8, 8, 3, 0.0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) {
      step.at(x, y) = 5.0;
      for (int c = 0; c < 3; ++c) edge.at(x, y, c) = 1.0;
    }
  }
  CHECK(smoothness_loss(step, edge) < smoothness_loss(step, flat));
}

TEST_CASE("smoothness scales quadratically with depth") {
  Rng rng(7);
  const ImageGrid img = random_image(rng, 10, 10, 3);
  DepthMap d(10, 10);
  for (double& v : d.values()) v = rng.uniform(1, 10);
  const double base = smoothness_loss(d, img);
  for (double s : {0.5, 2.0, 4.0}) CHECK(smoothness_loss(d.scaled(s), img) == s * s * base);
  CHECK(smoothness_loss(d.scaled(10.0), img) == doctest::Approx(100.0 * base).epsilon(1e-14));
}

TEST_CASE("normalized depth difference") {
  CHECK(normalized_depth_difference(1.0, 3.0) == 0.5);
  CHECK(normalized_depth_difference(3.0, 1.0) == 0.5);
  CHECK(normalized_depth_difference(2.0, 2.0) == 0.0);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp(rng.uniform(-10, 10));
    const double b = std::exp(rng.uniform(-10, 10));
    const double d = normalized_depth_difference(a, b);
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    CHECK(d == normalized_depth_difference(b, a));
  }
}

TEST_CASE("geometry loss and masks") {
  std::vector<std::uint8_t> v{1, 1, 0, 1};
  CHECK(geometry_consistency_loss(std::vector<double>{0, 0, 0.9, 0}, v) == 0.0);
  CHECK(geometry_consistency_loss(std::vector<double>(4, 0.5), v) == 0.5);
  CHECK_THROWS_AS(geometry_consistency_loss(std::vector<double>(4, 0.5), std::vector<std::uint8_t>(4, 0)),
                  NoOverlapError);
  const auto m = self_discovered_mask(std::vector<double>{0.0, 0.5, 0.25});
  CHECK(m == std::vector<double>{1.0, 0.5, 0.75});
}

TEST_CASE("auto-mask strictness") {
  Rng rng(9);
  const ImageGrid a = random_image(rng, 6, 6, 3);
  std::vector<std::uint8_t> all(36, 1);
  for (auto m : auto_mask(a, a, a, all)) CHECK(m == 0);
  // Warp matches exactly while the source differs.
  const ImageGrid b = random_image(rng, 6, 6, 3);
  for (auto m : auto_mask(a, b, a, all)) CHECK(m == 1);
  std::vector<std::uint8_t> none(36, 0);
  for (auto m : auto_mask(a, b, a, none)) CHECK(m == 0);
}

TEST_CASE("masked photometric loss") {
  const std::vector<double> photo{0.2, 0.4, 0.6, 0.8};
  const std::vector<std::uint8_t> all(4, 1);
  const std::vector<double> ones(4, 1.0), halves(4, 0.5);
  CHECK(masked_photometric_loss(photo, ones, all, all) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(masked_photometric_loss(photo, halves, all, all) == 0.5 * masked_photometric_loss(photo, ones, all, all));
  CHECK_THROWS_AS(masked_photometric_loss(photo, ones, all, std::vector<std::uint8_t>(4, 0)), NoOverlapError);

  // 4x4 with mixed masks.
  std::vector<double> p(16), ms(16);
  std::vector<std::uint8_t> valid(16), am(16);
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 16; ++i) {
    p[i] = 0.05 * i;
    ms[i] = 1.0 - 0.03 * i;
    valid[i] = i % 3 != 0;
    am[i] = i % 4 != 1;
    if (valid[i] && am[i]) {
      sum += ms[i] * p[i];
      ++n;
    }
  }
  CHECK(masked_photometric_loss(p, ms, valid, am) == doctest::Approx(sum / n).epsilon(1e-15));
}

TEST_CASE("oracle pair is consistent at the truth") {
  const OraclePair p = oracle_pair(64, 1);
  const DepthInconsistency di = depth_inconsistency(p.da, p.db, p.pab, p.K);
  int n = 0, creased = 0;
  for (std::size_t i = 0; i < di.diff.size(); ++i) {
    if (!di.valid[i]) continue;
    ++n;
    CHECK(di.diff[i] >= 0.0);
    CHECK(di.diff[i] < 1.0);
    const int x = static_cast<int>(i) % p.K.width, y = static_cast<int>(i) / p.K.width;
    if (!oracle::single_plane_footprint(p.scene, p.pose_b, p.pab, p.K, x, y, p.da.values()[i])) {
      ++creased;
      continue;
    }
    CHECK(di.diff[i] < 1e-3);
  }
  CHECK(creased < 0.05 * n);

  const LossBundle b = total_loss(p.ia, p.ib, p.da, p.db, p.pab, p.K, {}, {false});
  CHECK(b.geometry < 1e-3);
  CHECK(b.masked_photometric < 1e-3);
  CHECK(b.total == doctest::Approx(0.1 * b.smoothness).epsilon(0.05));
  CHECK(b.masked_photometric <= b.photometric);
  // Genuine motion over texture: the warp beats the unwarped source almost everywhere.
  int nv = 0, na = 0;
  for (std::size_t i = 0; i < b.valid.size(); ++i) {
    nv += b.valid[i];
    na += b.auto_mask[i];
  }
  CHECK(na > 0.9 * nv);
}

TEST_CASE("total loss is the weighted sum and reduces to L_G") {
  const OraclePair p = oracle_pair(32, 3);
  DepthMap da = p.da.scaled(1.1);
  const LossBundle b = total_loss(p.ia, p.ib, da, p.db, p.pab, p.K, {}, {false});
  CHECK(b.total == 1.0 * b.masked_photometric + 0.1 * b.smoothness + 0.5 * b.geometry);
  LossWeights g;
  g.alpha = 0.0;
  g.beta = 0.0;
  g.gamma = 1.0;
  CHECK(total_loss(p.ia, p.ib, da, p.db, p.pab, p.K, g, {false}).total == b.geometry);
  for (std::size_t i = 0; i < b.valid.size(); ++i) {
    if (b.valid[i]) CHECK(b.self_mask[i] == 1.0 - b.depth_diff[i]);
    CHECK((b.auto_mask[i] == 0 || b.auto_mask[i] == 1));
  }
}

TEST_CASE("loss weights validation") {
  LossWeights w;
  CHECK(w.alpha == 1.0);
  CHECK(w.beta == 0.1);
  CHECK(w.gamma == 0.5);
  CHECK(w.lambda == 0.15);
  CHECK(w.c1 == 0.0001);
  CHECK(w.c2 == 0.0009);
  w.lambda = 1.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = {};
  w.beta = -1;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("photometric and geometry terms are bit-stable under joint scaling") {
  OraclePair p = oracle_pair(32, 4);
  for (double& v : p.da.values()) v = dyadic(v * 1.05);
  for (double& v : p.db.values()) v = dyadic(v);
  for (int i = 0; i < 3; ++i) p.pab.translation[i] = dyadic(p.pab.translation[i]);
  const LossBundle ref = total_loss(p.ia, p.ib, p.da, p.db, p.pab, p.K, {}, {false});
  for (double s : {0.5, 2.0, 10.0}) {
    const LossBundle b = total_loss(p.ia, p.ib, p.da.scaled(s), p.db.scaled(s), p.pab.scaled(s), p.K, {}, {false});
    CHECK(b.photometric == ref.photometric);
    CHECK(b.masked_photometric == ref.masked_photometric);
    CHECK(b.geometry == ref.geometry);
    CHECK(b.depth_diff == ref.depth_diff);
  }
}

TEST_CASE("bidirectional objective is symmetric under swapping the views") {
  const OraclePair p = oracle_pair(32, 5);
  const DepthMap da = p.da.scaled(0.97);
  const DepthMap db = p.db.scaled(1.04);
  auto both = [&](const ImageGrid& i1, const ImageGrid& i2, const DepthMap& d1, const DepthMap& d2, const Pose& P) {
    const double f = total_loss(i1, i2, d1, d2, P, p.K, {}, {false}).total;
    const double r = total_loss(i2, i1, d2, d1, P.inverse(), p.K, {}, {false}).total;
    return std::pair{f, r};
  };
  const auto [f1, r1] = both(p.ia, p.ib, da, db, p.pab);
  const auto [f2, r2] = both(p.ib, p.ia, db, da, p.pab.inverse());
  CHECK(f1 + r1 == doctest::Approx(f2 + r2).epsilon(1e-14));
}
