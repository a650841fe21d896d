#include "vizsim/baselines.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/parallel.hpp"

namespace vizsim::baselines {

namespace {

void require_same_size(const ImageStimulus& a, const ImageStimulus& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(fmt::format("image sizes differ: {}x{} vs {}x{}", a.width, a.height, b.width, b.height));
  }
}

}  // namespace

double mse(const ImageStimulus& a, const ImageStimulus& b, MseSpace space) {
  require_same_size(a, b);
  if (space == MseSpace::lab) return mse(srgb_to_lab(a), srgb_to_lab(b), MseSpace::srgb);
  if (a.color_space != b.color_space) throw ValidationError("mse: images are in different color spaces");
  if (a.pixels.empty()) throw ValidationError("mse: empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels.size());
}

GrayImage to_gray(const ImageStimulus& image) {
  if (image.color_space != ColorSpace::srgb) throw ValidationError("to_gray: input must be sRGB");
  GrayImage g{image.width, image.height, std::vector<double>(image.width * image.height)};
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    const double r = srgb_to_linear(static_cast<double>(image.pixels[i * 3 + 0]));
    const double gr = srgb_to_linear(static_cast<double>(image.pixels[i * 3 + 1]));
    const double b = srgb_to_linear(static_cast<double>(image.pixels[i * 3 + 2]));
    g.pixels[i] = 0.299 * r + 0.587 * gr + 0.114 * b;
  }
  return g;
}

MsSsimConfig MsSsimConfig::with_scales(std::size_t k) {
  MsSsimConfig cfg;
  if (k == 0 || k > cfg.weights.size()) {
    throw ValidationError(fmt::format("MS-SSIM supports 1..{} scales, got {}", cfg.weights.size(), k));
  }
  cfg.scales = k;
  cfg.weights.resize(k);
  const double total = std::accumulate(cfg.weights.begin(), cfg.weights.end(), 0.0);
  for (double& w : cfg.weights) w /= total;
  return cfg;
}

void MsSsimConfig::validate() const {
  if (scales == 0) throw ValidationError("MS-SSIM needs at least one scale");
  if (weights.size() != scales) {
    throw ValidationError(fmt::format("MS-SSIM has {} scales but {} weights", scales, weights.size()));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  // The published weights are rounded to four decimals and sum to 1.0001.
  if (std::abs(total - 1.0) > 1e-3) throw ValidationError(fmt::format("MS-SSIM weights sum to {}, not 1", total));
  if (window == 0 || !(sigma > 0.0)) throw ValidationError("SSIM window and sigma must be positive");
}

std::size_t max_feasible_scales(std::size_t width, std::size_t height, std::size_t window) {
  std::size_t k = 0;
  std::size_t extent = std::min(width, height);
  while (extent >= window) {
    ++k;
    extent /= 2;
  }
  return k;
}

namespace {

struct SsimMaps {
  std::vector<double> luminance;
  std::vector<double> contrast_structure;
};

std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double mid = (static_cast<double>(size) - 1.0) / 2.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - mid;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= total;
  return k;
}

// Separable 'valid' filtering of a row-major image.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t w, std::size_t h,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size(), ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * img[y * w + x + i];
      tmp[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

SsimMaps ssim_maps(const GrayImage& a, const GrayImage& b, const MsSsimConfig& cfg) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(fmt::format("image sizes differ: {}x{} vs {}x{}", a.width, a.height, b.width, b.height));
  }
  if (a.width < cfg.window || a.height < cfg.window) {
    throw ValidationError(fmt::format("image {}x{} is smaller than the {}x{} SSIM window", a.width, a.height,
                                      cfg.window, cfg.window));
  }
  const auto k = gaussian_kernel(cfg.window, cfg.sigma);
  const std::size_t w = a.width, h = a.height;
  std::vector<double> aa(a.pixels.size()), bb(a.pixels.size()), ab(a.pixels.size());
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    aa[i] = a.pixels[i] * a.pixels[i];
    bb[i] = b.pixels[i] * b.pixels[i];
    ab[i] = a.pixels[i] * b.pixels[i];
  }
  const auto mu_a = filter_valid(a.pixels, w, h, k);
  const auto mu_b = filter_valid(b.pixels, w, h, k);
  const auto e_aa = filter_valid(aa, w, h, k);
  const auto e_bb = filter_valid(bb, w, h, k);
  const auto e_ab = filter_valid(ab, w, h, k);

  const double c1 = cfg.c1(), c2 = cfg.c2();
  SsimMaps maps;
  maps.luminance.resize(mu_a.size());
  maps.contrast_structure.resize(mu_a.size());
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    maps.luminance[i] = (2.0 * mu_a[i] * mu_b[i] + c1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1);
    maps.contrast_structure[i] = (2.0 * cov + c2) / (var_a + var_b + c2);
  }
  return maps;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

// x^e that stays defined for negative bases with fractional exponents.
double safe_pow(double x, double e) {
  if (x >= 0.0 || e == std::floor(e)) return std::pow(x, e);
  return 0.0;
}

GrayImage downsample2(const GrayImage& g) {
  GrayImage out{g.width / 2, g.height / 2, {}};
  out.pixels.resize(out.width * out.height);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      out.pixels[y * out.width + x] =
          0.25 * (g.at(2 * y, 2 * x) + g.at(2 * y, 2 * x + 1) + g.at(2 * y + 1, 2 * x) + g.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b, const MsSsimConfig& cfg) {
  const auto maps = ssim_maps(a, b, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i < maps.luminance.size(); ++i) sum += maps.luminance[i] * maps.contrast_structure[i];
  return sum / static_cast<double>(maps.luminance.size());
}

double ssim(const ImageStimulus& a, const ImageStimulus& b, const MsSsimConfig& cfg) {
  return ssim(to_gray(a), to_gray(b), cfg);
}

double ms_ssim(const GrayImage& a, const GrayImage& b, const MsSsimConfig& cfg) {
  cfg.validate();
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(fmt::format("image sizes differ: {}x{} vs {}x{}", a.width, a.height, b.width, b.height));
  }
  const std::size_t feasible = max_feasible_scales(a.width, a.height, cfg.window);
  if (feasible < cfg.scales) {
    throw ValidationError(fmt::format("image {}x{} too small for {} MS-SSIM scales with window {} (max feasible K = {})",
                                      a.width, a.height, cfg.scales, cfg.window, feasible));
  }
  GrayImage x = a, y = b;
  double result = 1.0;
  for (std::size_t i = 0; i < cfg.scales; ++i) {
    const auto maps = ssim_maps(x, y, cfg);
    if (i + 1 < cfg.scales) {
      result *= safe_pow(mean(maps.contrast_structure), cfg.weights[i]);
      x = downsample2(x);
      y = downsample2(y);
    } else {
      double sum = 0.0;
      for (std::size_t p = 0; p < maps.luminance.size(); ++p) {
        sum += safe_pow(maps.luminance[p], cfg.alpha) * safe_pow(maps.contrast_structure[p], cfg.weights[i]);
      }
      result *= sum / static_cast<double>(maps.luminance.size());
    }
  }
  return result;
}

double ms_ssim(const ImageStimulus& a, const ImageStimulus& b, const MsSsimConfig& cfg) {
  return ms_ssim(to_gray(a), to_gray(b), cfg);
}

DistanceMatrix pairwise_matrix(const std::vector<ImageStimulus>& images, BaselineKind kind, const MsSsimConfig& cfg,
                               unsigned threads) {
  if (images.size() < 2) throw ValidationError("pairwise matrix needs at least two images");
  std::vector<std::string> ids;
  for (const auto& img : images) ids.push_back(img.id);
  DistanceMatrix m(ids);
  const std::size_t n = images.size();

  // Convert once per image.
  std::vector<ImageStimulus> lab;
  std::vector<GrayImage> gray;
  if (kind == BaselineKind::mse_lab) {
    lab.resize(n);
    parallel_for(n, threads, [&](std::size_t i) { lab[i] = srgb_to_lab(images[i]); });
  } else if (kind == BaselineKind::ssim || kind == BaselineKind::ms_ssim) {
    gray.resize(n);
    parallel_for(n, threads, [&](std::size_t i) { gray[i] = to_gray(images[i]); });
  }

  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      try {
        switch (kind) {
          case BaselineKind::mse_srgb: d = mse(images[i], images[j]); break;
          case BaselineKind::mse_lab: d = mse(lab[i], lab[j]); break;
          case BaselineKind::ssim: d = std::max(0.0, 1.0 - ssim(gray[i], gray[j], cfg)); break;
          case BaselineKind::ms_ssim: d = std::max(0.0, 1.0 - ms_ssim(gray[i], gray[j], cfg)); break;
        }
      } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("({}, {}): {}", images[i].id, images[j].id, e.what()));
      }
      m(i, j) = d;
      m(j, i) = d;
    }
  });
  return m;
}

}  // namespace vizsim::baselines
