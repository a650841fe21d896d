#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vizsim/tensor.hpp"

namespace vizsim {

enum class ColorSpace { srgb, linear_rgb, lab };

/// H x W x 3 interleaved pixels. sRGB/linear values live in [0, 1];
/// LAB stores (L, a, b) with L in [0, 100].
struct ImageStimulus {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;
  ColorSpace color_space = ColorSpace::srgb;
  std::string id;

  float& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

  static ImageStimulus filled(std::size_t width, std::size_t height, std::array<float, 3> rgb,
                              ColorSpace space = ColorSpace::srgb);
};

enum class ResizeFilter { bilinear_antialias };

inline constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd = {0.229, 0.224, 0.225};

struct PreprocessConfig {
  std::size_t target_size = 64;
  // Applied to inputs already mapped to [-1, 1]: (v - shift) / scale.
  std::array<double, 3> shift = {2 * kImageNetMean[0] - 1, 2 * kImageNetMean[1] - 1, 2 * kImageNetMean[2] - 1};
  std::array<double, 3> scale = {2 * kImageNetStd[0], 2 * kImageNetStd[1], 2 * kImageNetStd[2]};
  ResizeFilter filter = ResizeFilter::bilinear_antialias;

  /// Throws ValidationError on target_size < 64 or non-positive scale.
  void validate() const;
};

/// Decodes PNG or JPEG bytes into an sRGB stimulus; alpha is composited
/// over opaque white.
ImageStimulus decode_image(std::span<const std::uint8_t> bytes, std::string id = {});
ImageStimulus load_image(const std::filesystem::path& path);

/// 8-bit RGB PNG (no alpha, no timestamp) from an sRGB stimulus.
std::vector<std::uint8_t> encode_png(const ImageStimulus& image);
void write_png(const ImageStimulus& image, const std::filesystem::path& path);

/// Resamples to target x target with a triangle filter widened by the
/// downscale factor (antialiasing); upscaling is plain bilinear.
ImageStimulus resize(const ImageStimulus& image, std::size_t target);

/// Resize + [-1, 1] mapping + per-channel normalization into a (3, S, S)
/// tensor. Requires an sRGB stimulus.
Tensor to_model_input(const ImageStimulus& image, const PreprocessConfig& config);

/// sRGB -> linear (IEC 61966-2-1 piecewise curve) -> XYZ (D65) -> CIELAB.
ImageStimulus srgb_to_lab(const ImageStimulus& image);
ImageStimulus srgb_to_linear(const ImageStimulus& image);

double srgb_to_linear(double v);

}  // namespace vizsim
