#pragma once

#include <cstddef>
#include <vector>

#include "vizsim/distance_matrix.hpp"
#include "vizsim/preprocess.hpp"

namespace vizsim::baselines {

enum class MseSpace { srgb, lab };

/// Mean over pixels and channels of the squared difference. LAB mode converts
/// both sRGB inputs first.
double mse(const ImageStimulus& a, const ImageStimulus& b, MseSpace space = MseSpace::srgb);

/// Single-channel float image, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

/// Rec.601 luma over linearized sRGB values.
GrayImage to_gray(const ImageStimulus& image);

struct MsSsimConfig {
  std::size_t scales = 5;  // K
  double alpha = 1.0;
  // Standard untuned MS-SSIM scale weights; beta_i = gamma_i = w_i.
  std::vector<double> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  std::size_t window = 11;
  double sigma = 1.5;
  double dynamic_range = 1.0;  // L
  double k1 = 0.01;
  double k2 = 0.03;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  /// Config with K scales; weights are the first K standard weights,
  /// renormalized to sum to one.
  static MsSsimConfig with_scales(std::size_t k);

  /// K >= 1, one weight per scale, weights sum to 1 within 1e-3.
  void validate() const;
};

/// Mean local SSIM with a Gaussian window (valid positions only).
double ssim(const GrayImage& a, const GrayImage& b, const MsSsimConfig& cfg = {});
double ssim(const ImageStimulus& a, const ImageStimulus& b, const MsSsimConfig& cfg = {});

/// l(x_K, y_K)^alpha * prod_i c(x_i, y_i)^{w_i} s(x_i, y_i)^{w_i} over K dyadic
/// scales (2x2 mean downsampling). Luminance and the coarsest contrast-structure
/// term are combined per window position, so K = 1 is exactly SSIM.
double ms_ssim(const GrayImage& a, const GrayImage& b, const MsSsimConfig& cfg = {});
double ms_ssim(const ImageStimulus& a, const ImageStimulus& b, const MsSsimConfig& cfg = {});

/// Largest K whose coarsest scale still fits the window.
std::size_t max_feasible_scales(std::size_t width, std::size_t height, std::size_t window);

enum class BaselineKind { mse_srgb, mse_lab, ssim, ms_ssim };

/// Pairwise distances: MSE as-is, SSIM-family as 1 - similarity.
DistanceMatrix pairwise_matrix(const std::vector<ImageStimulus>& images, BaselineKind kind,
                               const MsSsimConfig& cfg = {}, unsigned threads = 1);

}  // namespace vizsim::baselines
