#include "vizsim/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vizsim/error.hpp"

namespace vizsim {

ImageStimulus ImageStimulus::filled(std::size_t width, std::size_t height, std::array<float, 3> rgb,
                                    ColorSpace space) {
  ImageStimulus img;
  img.width = width;
  img.height = height;
  img.color_space = space;
  img.pixels.resize(width * height * 3);
  for (std::size_t i = 0; i < width * height; ++i) {
    for (std::size_t c = 0; c < 3; ++c) img.pixels[i * 3 + c] = rgb[c];
  }
  return img;
}

void PreprocessConfig::validate() const {
  if (target_size < 64) {
    throw ValidationError(fmt::format("preprocess target size {} is below the 64 pixel minimum", target_size));
  }
  for (double s : scale) {
    if (!(s > 0.0)) throw ValidationError("preprocess scale components must be positive");
  }
}

namespace {

struct Tap {
  std::size_t first;
  std::vector<double> weights;
};

std::vector<Tap> resample_taps(std::size_t in, std::size_t out) {
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double width = std::max(scale, 1.0);  // triangle half-width in input pixels
  std::vector<Tap> taps(out);
  for (std::size_t i = 0; i < out; ++i) {
    const double center = (static_cast<double>(i) + 0.5) * scale;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(center - width));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(center + width));
    Tap& tap = taps[i];
    tap.first = static_cast<std::size_t>(std::max<std::ptrdiff_t>(lo, 0));
    double total = 0.0;
    for (auto j = static_cast<std::ptrdiff_t>(tap.first); j < std::min<std::ptrdiff_t>(hi, in); ++j) {
      const double d = std::abs((static_cast<double>(j) + 0.5 - center) / width);
      const double w = d < 1.0 ? 1.0 - d : 0.0;
      tap.weights.push_back(w);
      total += w;
    }
    for (double& w : tap.weights) w /= total;
  }
  return taps;
}

}  // namespace

ImageStimulus resize(const ImageStimulus& image, std::size_t target) {
  if (target == 0) throw ValidationError("resize: target must be >= 1");
  if (image.width == target && image.height == target) return image;

  const auto tx = resample_taps(image.width, target);
  const auto ty = resample_taps(image.height, target);

  // Horizontal pass into a (height x target) buffer, then vertical.
  std::vector<double> tmp(image.height * target * 3, 0.0);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < target; ++x) {
      const Tap& tap = tx[x];
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < tap.weights.size(); ++k) acc += tap.weights[k] * image.at(y, tap.first + k, c);
        tmp[(y * target + x) * 3 + c] = acc;
      }
    }
  }
  ImageStimulus out;
  out.width = target;
  out.height = target;
  out.color_space = image.color_space;
  out.id = image.id;
  out.pixels.resize(target * target * 3);
  for (std::size_t y = 0; y < target; ++y) {
    const Tap& tap = ty[y];
    for (std::size_t x = 0; x < target; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < tap.weights.size(); ++k) {
          acc += tap.weights[k] * tmp[((tap.first + k) * target + x) * 3 + c];
        }
        out.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor to_model_input(const ImageStimulus& image, const PreprocessConfig& config) {
  config.validate();
  if (image.color_space != ColorSpace::srgb) {
    throw ValidationError(fmt::format("{}: model input requires an sRGB stimulus", image.id));
  }
  const ImageStimulus sized = resize(image, config.target_size);
  const std::size_t s = config.target_size;
  Tensor out({3, s, s});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        const double v = 2.0 * sized.at(y, x, c) - 1.0;
        out.at(c, y, x) = static_cast<float>((v - config.shift[c]) / config.scale[c]);
      }
    }
  }
  return out;
}

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

ImageStimulus srgb_to_linear(const ImageStimulus& image) {
  if (image.color_space != ColorSpace::srgb) throw ValidationError("srgb_to_linear: input must be sRGB");
  ImageStimulus out = image;
  out.color_space = ColorSpace::linear_rgb;
  for (float& v : out.pixels) v = static_cast<float>(srgb_to_linear(static_cast<double>(v)));
  return out;
}

namespace {

// sRGB primaries, D65 white. The white point is taken as the matrix row sums so
// that sRGB white lands exactly on a = b = 0.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

ImageStimulus srgb_to_lab(const ImageStimulus& image) {
  if (image.color_space != ColorSpace::srgb) throw ValidationError("srgb_to_lab: input must be sRGB");
  ImageStimulus out = image;
  out.color_space = ColorSpace::lab;
  for (std::size_t i = 0; i < image.width * image.height; ++i) {
    double lin[3];
    for (std::size_t c = 0; c < 3; ++c) lin[c] = srgb_to_linear(static_cast<double>(image.pixels[i * 3 + c]));
    double f[3];
    for (std::size_t r = 0; r < 3; ++r) {
      const double xyz = kRgbToXyz[r][0] * lin[0] + kRgbToXyz[r][1] * lin[1] + kRgbToXyz[r][2] * lin[2];
      f[r] = lab_f(xyz / kWhite[r]);
    }
    out.pixels[i * 3 + 0] = static_cast<float>(116.0 * f[1] - 16.0);
    out.pixels[i * 3 + 1] = static_cast<float>(500.0 * (f[0] - f[1]));
    out.pixels[i * 3 + 2] = static_cast<float>(200.0 * (f[1] - f[2]));
  }
  return out;
}

}  // namespace vizsim
