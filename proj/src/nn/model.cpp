#include "vizsim/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/nn/ops.hpp"

namespace vizsim::nn {

namespace {

const Tensor kNoBias;

Tensor run_conv(const Tensor& x, const TensorArchive& w, const std::string& name, std::size_t stride,
                std::size_t padding, bool bias) {
  return conv2d(x, w.get(name + ".weight"), bias ? w.get(name + ".bias") : kNoBias, {stride, padding});
}

Tensor run_bn(const Tensor& x, const TensorArchive& w, const std::string& name) {
  return batchnorm2d(x, w.get(name + ".weight"), w.get(name + ".bias"), w.get(name + ".running_mean"),
                     w.get(name + ".running_var"));
}

Tensor run_block_stack(Tensor x, const BlockStackSpec& st, const std::string& name, const TensorArchive& w) {
  const std::size_t out_c = st.out_channels();
  for (std::size_t b = 0; b < st.blocks; ++b) {
    const std::string p = fmt::format("{}.{}", name, b);
    const std::size_t stride = b == 0 ? st.stride : 1;
    const std::size_t in_c = x.dim(0);
    Tensor y;
    if (st.bottleneck) {
      y = run_bn(run_conv(x, w, p + ".conv1", 1, 0, false), w, p + ".bn1");
      relu_inplace(y);
      y = run_bn(run_conv(y, w, p + ".conv2", stride, 1, false), w, p + ".bn2");
      relu_inplace(y);
      y = run_bn(run_conv(y, w, p + ".conv3", 1, 0, false), w, p + ".bn3");
    } else {
      y = run_bn(run_conv(x, w, p + ".conv1", stride, 1, false), w, p + ".bn1");
      relu_inplace(y);
      y = run_bn(run_conv(y, w, p + ".conv2", 1, 1, false), w, p + ".bn2");
    }
    if (stride != 1 || in_c != out_c) {
      x = run_bn(run_conv(x, w, p + ".downsample.0", stride, 0, false), w, p + ".downsample.1");
    }
    y = add(y, x);
    relu_inplace(y);
    x = std::move(y);
  }
  return x;
}

Tensor run_layer(const LayerSpec& layer, Tensor x, const TensorArchive& w) {
  switch (layer.kind) {
    case LayerKind::conv2d: {
      const auto& c = std::get<ConvSpec>(layer.params);
      return run_conv(x, w, layer.name, c.stride, c.padding, c.bias);
    }
    case LayerKind::batchnorm: return run_bn(x, w, layer.name);
    case LayerKind::relu: relu_inplace(x); return x;
    case LayerKind::maxpool2d: {
      const auto& p = std::get<PoolSpec>(layer.params);
      return maxpool2d(x, {p.kernel, p.stride, p.padding, p.ceil_mode});
    }
    case LayerKind::fire: {
      const auto& n = layer.name;
      const FireParams fp{&w.get(n + ".squeeze.weight"),   &w.get(n + ".squeeze.bias"),
                          &w.get(n + ".expand1x1.weight"), &w.get(n + ".expand1x1.bias"),
                          &w.get(n + ".expand3x3.weight"), &w.get(n + ".expand3x3.bias")};
      return fire_forward(x, fp);
    }
    case LayerKind::residual_block_stack:
      return run_block_stack(std::move(x), std::get<BlockStackSpec>(layer.params), layer.name, w);
    case LayerKind::avgpool: {
      const auto& a = std::get<AvgPoolSpec>(layer.params);
      return adaptive_avgpool2d(x, a.out_h, a.out_w);
    }
    case LayerKind::flatten: return x.reshaped({x.size()});
    case LayerKind::linear: return linear(x, w.get(layer.name + ".weight"), w.get(layer.name + ".bias"));
  }
  return x;
}

void check_input(const Tensor& image, const ArchitectureSpec& spec) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError(fmt::format("{}: model input must be (3, H, W), got {}", arch_name(spec.arch),
                                 shape_str(image.shape())));
  }
  if (image.dim(1) < kMinInputExtent || image.dim(2) < kMinInputExtent) {
    throw ShapeError(fmt::format("{}: input {}x{} is smaller than the {}x{} minimum", arch_name(spec.arch),
                                 image.dim(1), image.dim(2), kMinInputExtent, kMinInputExtent));
  }
}

}  // namespace

FeatureStack forward_features(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights) {
  check_input(image, spec);
  weights.validate_against(spec);

  FeatureStack stack;
  stack.arch = spec.arch;
  stack.layers.reserve(spec.extraction_layer_count);
  Tensor x = image;
  for (const auto& layer : spec.features) {
    x = run_layer(layer, std::move(x), weights);
    if (layer.is_extraction_point) {
      stack.layers.push_back(x);
      if (stack.layers.size() == spec.extraction_layer_count) break;
    }
  }
  return stack;
}

Tensor classify_logits(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights) {
  check_input(image, spec);
  try {
    weights.validate_against(spec, true);
  } catch (const Error& e) {
    throw ValidationError(fmt::format("classifier head unavailable: {}", e.what()));
  }
  Tensor x = image;
  for (const auto& layer : spec.features) x = run_layer(layer, std::move(x), weights);
  for (const auto& layer : spec.classifier) x = run_layer(layer, std::move(x), weights);
  return x.reshaped({x.size()});
}

std::size_t classify_sanity(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights) {
  const Tensor logits = classify_logits(image, spec, weights);
  const auto data = logits.data();
  return static_cast<std::size_t>(std::max_element(data.begin(), data.end()) - data.begin());
}

TensorArchive random_init(const ArchitectureSpec& spec, std::uint64_t seed) {
  TensorArchive archive({std::string(arch_name(spec.arch)), WeightSet::random, fmt::format("seed:{}", seed)});
  std::mt19937_64 rng(seed);
  // 53 random bits -> [0, 1); avoids implementation-defined distributions.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  for (const auto& slot : parameter_slots(spec)) {
    Tensor t(slot.shape);
    switch (slot.role) {
      case ParamRole::weight:
      case ParamRole::bias: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(slot.fan_in));
        for (float& v : t.data()) v = static_cast<float>((2.0 * unit() - 1.0) * bound);
        break;
      }
      case ParamRole::bn_gamma:
      case ParamRole::bn_running_var: std::fill(t.data().begin(), t.data().end(), 1.0f); break;
      case ParamRole::bn_beta:
      case ParamRole::bn_running_mean: break;
    }
    archive.put(slot.name, std::move(t));
  }
  return archive;
}

}  // namespace vizsim::nn
