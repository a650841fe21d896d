#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vizsim/baselines.hpp"
#include "vizsim/error.hpp"

using namespace vizsim;
using namespace vizsim::baselines;

namespace {

GrayImage random_gray(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  GrayImage g{n, n, std::vector<double>(n * n)};
  for (auto& v : g.pixels) v = u(rng);
  return g;
}

GrayImage constant_gray(std::size_t n, double v) { return {n, n, std::vector<double>(n * n, v)}; }

ImageStimulus random_image(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  ImageStimulus img = ImageStimulus::filled(n, n, {0, 0, 0});
  for (auto& v : img.pixels) v = u(rng);
  return img;
}

// CIE epsilon/kappa form of the sRGB to LAB conversion.
std::array<double, 3> hand_lab(double r, double g, double b) {
  auto lin = [](double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); };
  const double R = lin(r), G = lin(g), B = lin(b);
  const double X = (0.4124564 * R + 0.3575761 * G + 0.1804375 * B) / 0.9504700;
  const double Y = (0.2126729 * R + 0.7151522 * G + 0.0721750 * B) / 1.0000001;
  const double Z = (0.0193339 * R + 0.1191920 * G + 0.9503041 * B) / 1.0888300;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16) / 116; };
  return {116 * f(Y) - 16, 500 * (f(X) - f(Y)), 200 * (f(Y) - f(Z))};
}

}  // namespace

TEST(Mse, IdenticalIsZero) {
  auto a = random_image(8, 1);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse(a, a, MseSpace::lab), 0.0);
}

TEST(Mse, ZerosVersusOnes) {
  EXPECT_DOUBLE_EQ(mse(ImageStimulus::filled(3, 3, {0, 0, 0}), ImageStimulus::filled(3, 3, {1, 1, 1})), 1.0);
}

TEST(Mse, LabHandCase) {
  const std::array<std::array<float, 3>, 4> pa{{{1, 1, 1}, {0, 0, 0}, {1, 0, 0}, {0.5f, 0.5f, 0.5f}}};
  const std::array<std::array<float, 3>, 4> pb{{{0, 0, 1}, {0.2f, 0.6f, 0.1f}, {1, 0, 0}, {0.9f, 0.3f, 0.7f}}};
  auto a = ImageStimulus::filled(2, 2, {0, 0, 0}), b = a;
  double expected = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      a.pixels[i * 3 + c] = pa[i][c];
      b.pixels[i * 3 + c] = pb[i][c];
    }
    const auto la = hand_lab(pa[i][0], pa[i][1], pa[i][2]), lb = hand_lab(pb[i][0], pb[i][1], pb[i][2]);
    for (std::size_t c = 0; c < 3; ++c) expected += (la[c] - lb[c]) * (la[c] - lb[c]);
  }
  expected /= 12;
  EXPECT_NEAR(mse(a, b, MseSpace::lab), expected, 1e-5 * expected);
}

TEST(Mse, SizeMismatchThrows) {
  EXPECT_THROW(mse(ImageStimulus::filled(2, 2, {0, 0, 0}), ImageStimulus::filled(3, 2, {0, 0, 0})), ShapeError);
}

TEST(Mse, RootSatisfiesTriangleInequality) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto a = random_image(6, 3 * s), b = random_image(6, 3 * s + 1), c = random_image(6, 3 * s + 2);
    EXPECT_LE(std::sqrt(mse(a, c)), std::sqrt(mse(a, b)) + std::sqrt(mse(b, c)) + 1e-12);
  }
}

TEST(Ssim, SelfIsOne) {
  auto g = random_gray(32, 1);
  EXPECT_NEAR(ssim(g, g), 1.0, 1e-9);
}

TEST(Ssim, Symmetric) {
  auto a = random_gray(32, 2), b = random_gray(32, 3);
  EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
  EXPECT_LT(ssim(a, b), 1.0);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const MsSsimConfig cfg;
  const double m1 = 0.2, m2 = 0.7;
  const double expected = (2 * m1 * m2 + cfg.c1()) / (m1 * m1 + m2 * m2 + cfg.c1());
  EXPECT_NEAR(ssim(constant_gray(20, m1), constant_gray(20, m2)), expected, 1e-12);
}

TEST(Ssim, TooSmallRejected) { EXPECT_THROW(ssim(constant_gray(10, 0), constant_gray(10, 0)), ValidationError); }

TEST(MsSsim, SelfIsOne) {
  auto g = random_gray(200, 4);
  EXPECT_NEAR(ms_ssim(g, g), 1.0, 1e-9);
}

TEST(MsSsim, Symmetric) {
  auto a = random_gray(180, 5), b = random_gray(180, 6);
  EXPECT_DOUBLE_EQ(ms_ssim(a, b), ms_ssim(b, a));
}

TEST(MsSsim, SingleScaleEqualsSsim) {
  auto a = random_gray(40, 7), b = random_gray(40, 8);
  const auto cfg = MsSsimConfig::with_scales(1);
  EXPECT_NEAR(ms_ssim(a, b, cfg), ssim(a, b, cfg), 1e-6);
}

TEST(MsSsim, TooSmallReportsMaxFeasibleScales) {
  EXPECT_EQ(max_feasible_scales(64, 64, 11), 3u);
  EXPECT_EQ(max_feasible_scales(224, 224, 11), 5u);
  EXPECT_EQ(max_feasible_scales(10, 64, 11), 0u);
  try {
    ms_ssim(random_gray(64, 1), random_gray(64, 2));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("max feasible K = 3"), std::string::npos);
  }
}

TEST(MsSsim, ScaleWeightsSumToOne) {
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto cfg = MsSsimConfig::with_scales(k);
    double sum = 0;
    for (double w : cfg.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(cfg.weights.size(), k);
  }
  EXPECT_THROW(MsSsimConfig::with_scales(6), ValidationError);
}

TEST(MsSsim, MoreDistortionLowersScore) {
  auto a = random_gray(180, 9);
  auto mild = a, strong = a;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0, 1);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double e = n(rng);
    mild.pixels[i] += 0.02 * e;
    strong.pixels[i] += 0.2 * e;
  }
  EXPECT_GT(ms_ssim(a, mild), ms_ssim(a, strong));
}

TEST(Gray, Rec601OnLinearValues) {
  auto img = ImageStimulus::filled(1, 1, {1.0f, 0.5f, 0.0f});
  const double lin_half = std::pow((0.5 + 0.055) / 1.055, 2.4);
  EXPECT_NEAR(to_gray(img).pixels[0], 0.299 + 0.587 * lin_half, 1e-6);
}

TEST(BaselineMatrix, SimilarityBecomesDistance) {
  std::vector<ImageStimulus> imgs{random_image(24, 1), random_image(24, 2), random_image(24, 3)};
  for (std::size_t i = 0; i < imgs.size(); ++i) imgs[i].id = std::to_string(i);
  const auto m = pairwise_matrix(imgs, BaselineKind::ssim);
  m.validate();
  EXPECT_NEAR(m(0, 1), 1.0 - ssim(imgs[0], imgs[1]), 1e-12);
  const auto lab = pairwise_matrix(imgs, BaselineKind::mse_lab, {}, 2);
  EXPECT_DOUBLE_EQ(lab(1, 2), mse(imgs[1], imgs[2], MseSpace::lab));
}
