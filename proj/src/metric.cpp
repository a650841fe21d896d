#include "vizsim/metric.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/parallel.hpp"

namespace vizsim::metric {

ScalingWeights ScalingWeights::ones(const std::vector<std::size_t>& channels_per_layer) {
  ScalingWeights w;
  for (std::size_t c : channels_per_layer) w.layers.emplace_back(c, 1.0f);
  return w;
}

namespace {

std::vector<std::size_t> extraction_channels(const nn::ArchitectureSpec& spec) {
  std::vector<std::size_t> channels;
  for (const auto& s : nn::extraction_shapes(spec, {3, nn::kMinInputExtent, nn::kMinInputExtent})) {
    channels.push_back(s[0]);
  }
  return channels;
}

}  // namespace

ScalingWeights ScalingWeights::ones_for(const nn::ArchitectureSpec& spec) { return ones(extraction_channels(spec)); }

ScalingWeights ScalingWeights::from_archive(const nn::TensorArchive& archive, const nn::ArchitectureSpec& spec) {
  if (archive.metadata().architecture != nn::arch_name(spec.arch)) {
    throw ValidationError(fmt::format("scaling archive is for '{}', backbone is '{}'",
                                      archive.metadata().architecture, nn::arch_name(spec.arch)));
  }
  const auto channels = extraction_channels(spec);
  ScalingWeights w;
  w.label = archive.metadata().weight_set;
  for (std::size_t l = 0; l < channels.size(); ++l) {
    std::vector<float> v;
    if (const Tensor* direct = archive.find(fmt::format("scaling.{}", l))) {
      v.assign(direct->data().begin(), direct->data().end());
      for (float& x : v) x = std::max(x, 0.0f);
    } else if (const Tensor* lin = archive.find(fmt::format("lin{}.model.1.weight", l))) {
      v.assign(lin->data().begin(), lin->data().end());
      for (float& x : v) x = std::sqrt(std::max(x, 0.0f));
    } else {
      throw ValidationError(fmt::format("scaling archive has no vector for layer {}", l));
    }
    if (v.size() != channels[l]) {
      throw ShapeError(fmt::format("scaling vector for layer {} has {} components, layer has {} channels", l,
                                   v.size(), channels[l]));
    }
    w.layers.push_back(std::move(v));
  }
  return w;
}

std::vector<std::size_t> DistanceConfig::resolve_layers(std::size_t layer_count) const {
  if (!(epsilon > 0.0)) throw ValidationError("normalization epsilon must be positive");
  if (!layers) {
    std::vector<std::size_t> all(layer_count);
    for (std::size_t i = 0; i < layer_count; ++i) all[i] = i;
    return all;
  }
  if (layers->empty()) throw ValidationError("layer subset must not be empty");
  for (std::size_t l : *layers) {
    if (l >= layer_count) {
      throw ValidationError(fmt::format("layer index {} out of range (network has {} layers)", l, layer_count));
    }
  }
  return *layers;
}

FeatureStack unit_normalize(const FeatureStack& stack, double eps) {
  FeatureStack out;
  out.arch = stack.arch;
  out.normalized = true;
  out.layers.reserve(stack.layers.size());
  for (const Tensor& t : stack.layers) {
    const std::size_t c = t.dim(0), plane = t.dim(1) * t.dim(2);
    Tensor n(t.shape());
    for (std::size_t p = 0; p < plane; ++p) {
      double sq = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = t[ch * plane + p];
        sq += v * v;
      }
      const double denom = std::sqrt(sq) + eps;
      for (std::size_t ch = 0; ch < c; ++ch) n[ch * plane + p] = static_cast<float>(t[ch * plane + p] / denom);
    }
    out.layers.push_back(std::move(n));
  }
  return out;
}

std::vector<double> per_layer_distances(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w) {
  if (a.arch != b.arch) {
    throw ValidationError(fmt::format("feature stacks come from different architectures ({} vs {})",
                                      nn::arch_name(a.arch), nn::arch_name(b.arch)));
  }
  if (!a.normalized || !b.normalized) throw ValidationError("perceptual distance requires unit-normalized stacks");
  if (a.layers.size() != b.layers.size() || w.layers.size() != a.layers.size()) {
    throw ShapeError(fmt::format("layer counts differ: {} / {} stacks, {} scaling vectors", a.layers.size(),
                                 b.layers.size(), w.layers.size()));
  }
  std::vector<double> terms(a.layers.size(), 0.0);
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const Tensor& x = a.layers[l];
    const Tensor& y = b.layers[l];
    if (x.shape() != y.shape()) {
      throw ShapeError(fmt::format("layer {} shapes differ: {} vs {}", l, shape_str(x.shape()), shape_str(y.shape())));
    }
    const std::size_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
    if (w.layers[l].size() != c) {
      throw ShapeError(fmt::format("layer {} has {} channels but scaling vector has {}", l, c, w.layers[l].size()));
    }
    double sum = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double wc = w.layers[l][ch];
      const float* xp = x.ptr() + ch * plane;
      const float* yp = y.ptr() + ch * plane;
      double s = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        const double d = static_cast<double>(xp[p]) - static_cast<double>(yp[p]);
        s += d * d;
      }
      sum += wc * wc * s;
    }
    terms[l] = sum / static_cast<double>(plane);
  }
  return terms;
}

double perceptual_distance(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w,
                           const DistanceConfig& cfg) {
  const auto layers = cfg.resolve_layers(a.layers.size());
  const auto terms = per_layer_distances(a, b, w);
  double d = 0.0;
  for (std::size_t l : layers) d += terms[l];
  return d;
}

double distance_excluding_layer(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w,
                                std::size_t layer) {
  const std::size_t n = a.layers.size();
  if (layer >= n) throw ValidationError(fmt::format("layer {} is not one of the {} extraction layers", layer, n));
  if (n == 1) throw ValidationError("cannot exclude the only extraction layer");
  const auto terms = per_layer_distances(a, b, w);
  double d = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    if (l != layer) d += terms[l];
  }
  return d;
}

FeatureStack normalized_features(const ImageStimulus& image, const Backend& backend) {
  if (!backend.spec || !backend.weights) throw ValidationError("backend has no architecture or weights");
  const Tensor input = to_model_input(image, backend.preprocess);
  return unit_normalize(nn::forward_features(input, *backend.spec, *backend.weights), backend.distance.epsilon);
}

std::vector<FeatureStack> normalized_features(const std::vector<ImageStimulus>& images, const Backend& backend,
                                              unsigned threads) {
  std::vector<FeatureStack> stacks(images.size());
  parallel_for(images.size(), threads, [&](std::size_t i) {
    try {
      stacks[i] = normalized_features(images[i], backend);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", images[i].id, e.what()));
    }
  });
  return stacks;
}

std::vector<std::vector<double>> pairwise_layer_terms(const std::vector<FeatureStack>& stacks,
                                                      const ScalingWeights& w, unsigned threads) {
  const std::size_t n = stacks.size();
  std::vector<std::vector<double>> terms(n * (n - 1) / 2);
  // Rows are independent work items; row i owns pairs (i, j > i).
  parallel_for(n, threads, [&](std::size_t i) {
    std::size_t p = i * n - i * (i + 1) / 2;
    for (std::size_t j = i + 1; j < n; ++j, ++p) terms[p] = per_layer_distances(stacks[i], stacks[j], w);
  });
  return terms;
}

DistanceMatrix matrix_from_layer_terms(const std::vector<std::string>& ids,
                                       const std::vector<std::vector<double>>& terms,
                                       const std::vector<std::size_t>& layers) {
  const std::size_t n = ids.size();
  if (terms.size() != n * (n - 1) / 2) throw ShapeError("pair term count does not match id count");
  DistanceMatrix m(ids);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      double d = 0.0;
      for (std::size_t l : layers) d += terms[p].at(l);
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

DistanceMatrix pairwise_matrix(const std::vector<ImageStimulus>& images, const Backend& backend, unsigned threads) {
  if (images.size() < 2) throw ValidationError("pairwise matrix needs at least two images");
  std::vector<std::string> ids;
  for (const auto& img : images) ids.push_back(img.id);
  const auto stacks = normalized_features(images, backend, threads);
  const auto layers = backend.distance.resolve_layers(stacks.front().layers.size());
  return matrix_from_layer_terms(ids, pairwise_layer_terms(stacks, backend.scaling, threads), layers);
}

}  // namespace vizsim::metric
