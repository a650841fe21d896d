#include "vizsim/nn/architecture.hpp"

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/nn/ops.hpp"

namespace vizsim::nn {

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::alexnet: return "alexnet";
    case Arch::squeezenet: return "squeezenet";
    case Arch::vgg16: return "vgg16";
    case Arch::resnet18: return "resnet18";
    case Arch::resnet50: return "resnet50";
  }
  return "unknown";
}

std::optional<Arch> parse_arch(std::string_view name) {
  for (Arch a : {Arch::alexnet, Arch::squeezenet, Arch::vgg16, Arch::resnet18, Arch::resnet50}) {
    if (arch_name(a) == name) return a;
  }
  return std::nullopt;
}

bool arch_available(Arch arch) {
#ifdef VIZSIM_OPTIONAL_ARCHS
  (void)arch;
  return true;
#else
  return arch == Arch::alexnet || arch == Arch::squeezenet;
#endif
}

namespace {

LayerSpec conv(std::string name, std::size_t in, std::size_t out, std::size_t k, std::size_t s, std::size_t p,
               bool bias = true) {
  return {LayerKind::conv2d, std::move(name), ConvSpec{in, out, k, s, p, bias}, false};
}
LayerSpec relu_layer(std::string name, bool extract = false) {
  return {LayerKind::relu, std::move(name), std::monostate{}, extract};
}
LayerSpec maxpool(std::size_t k, std::size_t s, std::size_t p = 0, bool ceil = false, std::string name = {}) {
  return {LayerKind::maxpool2d, std::move(name), PoolSpec{k, s, p, ceil}, false};
}
LayerSpec fire(std::string name, std::size_t in, std::size_t sq, std::size_t e1, std::size_t e3, bool extract) {
  return {LayerKind::fire, std::move(name), FireSpec{in, sq, e1, e3}, extract};
}
LayerSpec avgpool(std::size_t oh, std::size_t ow) { return {LayerKind::avgpool, "", AvgPoolSpec{oh, ow}, false}; }
LayerSpec flatten() { return {LayerKind::flatten, "", std::monostate{}, false}; }
LayerSpec fc(std::string name, std::size_t in, std::size_t out) {
  return {LayerKind::linear, std::move(name), LinearSpec{in, out}, false};
}
LayerSpec extract(LayerSpec l) {
  l.is_extraction_point = true;
  return l;
}

ArchitectureSpec make_alexnet() {
  ArchitectureSpec s{Arch::alexnet, {}, {}, 5};
  s.features = {
      conv("features.0", 3, 64, 11, 4, 2),    relu_layer("features.1", true),  maxpool(3, 2),
      conv("features.3", 64, 192, 5, 1, 2),   relu_layer("features.4", true),  maxpool(3, 2),
      conv("features.6", 192, 384, 3, 1, 1),  relu_layer("features.7", true),
      conv("features.8", 384, 256, 3, 1, 1),  relu_layer("features.9", true),
      conv("features.10", 256, 256, 3, 1, 1), relu_layer("features.11", true),
  };
  s.classifier = {
      maxpool(3, 2), avgpool(6, 6), flatten(), fc("classifier.1", 256 * 6 * 6, 4096), relu_layer("classifier.2"),
      fc("classifier.4", 4096, 4096), relu_layer("classifier.5"), fc("classifier.6", 4096, 1000),
  };
  return s;
}

ArchitectureSpec make_squeezenet() {
  // squeezenet1_1 layout; pools use ceil sizing like the reference framework.
  ArchitectureSpec s{Arch::squeezenet, {}, {}, 7};
  s.features = {
      conv("features.0", 3, 64, 3, 2, 0),
      relu_layer("features.1", true),
      maxpool(3, 2, 0, true),
      fire("features.3", 64, 16, 64, 64, false),
      fire("features.4", 128, 16, 64, 64, true),
      maxpool(3, 2, 0, true),
      fire("features.6", 128, 32, 128, 128, false),
      fire("features.7", 256, 32, 128, 128, true),
      maxpool(3, 2, 0, true),
      fire("features.9", 256, 48, 192, 192, true),
      fire("features.10", 384, 48, 192, 192, true),
      fire("features.11", 384, 64, 256, 256, true),
      fire("features.12", 512, 64, 256, 256, true),
  };
  s.classifier = {conv("classifier.1", 512, 1000, 1, 1, 0), relu_layer("classifier.2"), avgpool(1, 1), flatten()};
  return s;
}

#ifdef VIZSIM_OPTIONAL_ARCHS
ArchitectureSpec make_vgg16() {
  ArchitectureSpec s{Arch::vgg16, {}, {}, 5};
  const int cfg[] = {64, 64, -1, 128, 128, -1, 256, 256, 256, -1, 512, 512, 512, -1, 512, 512, 512};
  std::size_t index = 0, in = 3, relu_count = 0;
  for (int v : cfg) {
    if (v < 0) {
      s.features.push_back(maxpool(2, 2));
      ++index;
      continue;
    }
    const auto out = static_cast<std::size_t>(v);
    s.features.push_back(conv(fmt::format("features.{}", index), in, out, 3, 1, 1));
    ++relu_count;
    const bool ext = relu_count == 2 || relu_count == 4 || relu_count == 7 || relu_count == 10 || relu_count == 13;
    s.features.push_back(relu_layer(fmt::format("features.{}", index + 1), ext));
    index += 2;
    in = out;
  }
  s.classifier = {
      maxpool(2, 2), avgpool(7, 7), flatten(), fc("classifier.0", 512 * 7 * 7, 4096), relu_layer("classifier.1"),
      fc("classifier.3", 4096, 4096), relu_layer("classifier.4"), fc("classifier.6", 4096, 1000),
  };
  return s;
}

ArchitectureSpec make_resnet(Arch arch) {
  const bool bottleneck = arch == Arch::resnet50;
  const std::size_t blocks[4] = {bottleneck ? 3u : 2u, bottleneck ? 4u : 2u, bottleneck ? 6u : 2u,
                                 bottleneck ? 3u : 2u};
  const std::size_t expansion = bottleneck ? 4 : 1;
  ArchitectureSpec s{arch, {}, {}, 5};
  s.features = {
      extract(conv("conv1", 3, 64, 7, 2, 3, false)),
      {LayerKind::batchnorm, "bn1", BatchNormSpec{64}, false},
      relu_layer("relu"),
      extract(maxpool(3, 2, 1, false, "maxpool")),
  };
  std::size_t in = 64;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t planes = 64u << i;
    s.features.push_back({LayerKind::residual_block_stack, fmt::format("layer{}", i + 1),
                          BlockStackSpec{in, planes, blocks[i], i == 0 ? 1u : 2u, bottleneck}, i > 0});
    in = planes * expansion;
  }
  s.classifier = {avgpool(1, 1), flatten(), fc("fc", in, 1000)};
  return s;
}
#endif

void add_conv_slots(std::vector<ParamSlot>& out, const std::string& name, std::size_t in, std::size_t o,
                    std::size_t k, bool bias, bool head) {
  const std::size_t fan_in = in * k * k;
  out.push_back({name + ".weight", {o, in, k, k}, ParamRole::weight, fan_in, true, head});
  if (bias) out.push_back({name + ".bias", {o}, ParamRole::bias, fan_in, true, head});
}

void add_bn_slots(std::vector<ParamSlot>& out, const std::string& name, std::size_t c, bool head) {
  out.push_back({name + ".weight", {c}, ParamRole::bn_gamma, 0, true, head});
  out.push_back({name + ".bias", {c}, ParamRole::bn_beta, 0, true, head});
  out.push_back({name + ".running_mean", {c}, ParamRole::bn_running_mean, 0, false, head});
  out.push_back({name + ".running_var", {c}, ParamRole::bn_running_var, 0, false, head});
}

void add_layer_slots(std::vector<ParamSlot>& out, const LayerSpec& layer, bool head) {
  switch (layer.kind) {
    case LayerKind::conv2d: {
      const auto& c = std::get<ConvSpec>(layer.params);
      add_conv_slots(out, layer.name, c.in_channels, c.out_channels, c.kernel, c.bias, head);
      break;
    }
    case LayerKind::batchnorm:
      add_bn_slots(out, layer.name, std::get<BatchNormSpec>(layer.params).channels, head);
      break;
    case LayerKind::fire: {
      const auto& f = std::get<FireSpec>(layer.params);
      add_conv_slots(out, layer.name + ".squeeze", f.in_channels, f.squeeze, 1, true, head);
      add_conv_slots(out, layer.name + ".expand1x1", f.squeeze, f.expand1x1, 1, true, head);
      add_conv_slots(out, layer.name + ".expand3x3", f.squeeze, f.expand3x3, 3, true, head);
      break;
    }
    case LayerKind::residual_block_stack: {
      const auto& st = std::get<BlockStackSpec>(layer.params);
      const std::size_t out_c = st.out_channels();
      for (std::size_t b = 0; b < st.blocks; ++b) {
        const std::string p = fmt::format("{}.{}", layer.name, b);
        const std::size_t in_b = b == 0 ? st.in_channels : out_c;
        if (st.bottleneck) {
          add_conv_slots(out, p + ".conv1", in_b, st.planes, 1, false, head);
          add_bn_slots(out, p + ".bn1", st.planes, head);
          add_conv_slots(out, p + ".conv2", st.planes, st.planes, 3, false, head);
          add_bn_slots(out, p + ".bn2", st.planes, head);
          add_conv_slots(out, p + ".conv3", st.planes, out_c, 1, false, head);
          add_bn_slots(out, p + ".bn3", out_c, head);
        } else {
          add_conv_slots(out, p + ".conv1", in_b, st.planes, 3, false, head);
          add_bn_slots(out, p + ".bn1", st.planes, head);
          add_conv_slots(out, p + ".conv2", st.planes, st.planes, 3, false, head);
          add_bn_slots(out, p + ".bn2", st.planes, head);
        }
        const std::size_t stride = b == 0 ? st.stride : 1;
        if (stride != 1 || in_b != out_c) {
          add_conv_slots(out, p + ".downsample.0", in_b, out_c, 1, false, head);
          add_bn_slots(out, p + ".downsample.1", out_c, head);
        }
      }
      break;
    }
    case LayerKind::linear: {
      const auto& l = std::get<LinearSpec>(layer.params);
      out.push_back({layer.name + ".weight", {l.out_features, l.in_features}, ParamRole::weight, l.in_features,
                     true, head});
      out.push_back({layer.name + ".bias", {l.out_features}, ParamRole::bias, l.in_features, true, head});
      break;
    }
    default: break;
  }
}

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
  if (in + 2 * p < k) throw ShapeError(fmt::format("kernel {} does not fit extent {} (pad {})", k, in, p));
  return (in + 2 * p - k) / s + 1;
}

Shape apply_layer_shape(const LayerSpec& layer, const Shape& in) {
  auto require_channels = [&](std::size_t expected) {
    if (in.size() != 3 || in[0] != expected) {
      throw ShapeError(fmt::format("layer '{}' expects {} input channels, got shape {}", layer.name, expected,
                                   shape_str(in)));
    }
  };
  switch (layer.kind) {
    case LayerKind::conv2d: {
      const auto& c = std::get<ConvSpec>(layer.params);
      require_channels(c.in_channels);
      return {c.out_channels, conv_extent(in[1], c.kernel, c.stride, c.padding),
              conv_extent(in[2], c.kernel, c.stride, c.padding)};
    }
    case LayerKind::batchnorm:
      require_channels(std::get<BatchNormSpec>(layer.params).channels);
      return in;
    case LayerKind::relu: return in;
    case LayerKind::maxpool2d: {
      const auto& p = std::get<PoolSpec>(layer.params);
      if (in.size() != 3 || p.kernel > in[1] + 2 * p.padding || p.kernel > in[2] + 2 * p.padding) {
        throw ShapeError(fmt::format("maxpool kernel {} larger than input {}", p.kernel, shape_str(in)));
      }
      const Pool2dParams pp{p.kernel, p.stride, p.padding, p.ceil_mode};
      return {in[0], pooled_extent(in[1], pp), pooled_extent(in[2], pp)};
    }
    case LayerKind::fire: {
      const auto& f = std::get<FireSpec>(layer.params);
      require_channels(f.in_channels);
      return {f.out_channels(), in[1], in[2]};
    }
    case LayerKind::residual_block_stack: {
      const auto& st = std::get<BlockStackSpec>(layer.params);
      require_channels(st.in_channels);
      // 3x3 pad 1 (basic) or 1x1 then 3x3 pad 1 (bottleneck) carry the stride.
      return {st.out_channels(), conv_extent(in[1], 3, st.stride, 1), conv_extent(in[2], 3, st.stride, 1)};
    }
    case LayerKind::avgpool: {
      const auto& a = std::get<AvgPoolSpec>(layer.params);
      return {in.at(0), a.out_h, a.out_w};
    }
    case LayerKind::flatten: return {shape_numel(in)};
    case LayerKind::linear: {
      const auto& l = std::get<LinearSpec>(layer.params);
      if (shape_numel(in) != l.in_features) {
        throw ShapeError(fmt::format("linear '{}' expects {} features, got {}", layer.name, l.in_features,
                                     shape_numel(in)));
      }
      return {l.out_features};
    }
  }
  return in;
}

}  // namespace

const ArchitectureSpec& architecture_spec(Arch arch) {
  if (!arch_available(arch)) {
    throw ValidationError(fmt::format("architecture '{}' is not compiled into this build", arch_name(arch)));
  }
  static const ArchitectureSpec alexnet = make_alexnet();
  static const ArchitectureSpec squeezenet = make_squeezenet();
  switch (arch) {
    case Arch::alexnet: return alexnet;
    case Arch::squeezenet: return squeezenet;
#ifdef VIZSIM_OPTIONAL_ARCHS
    case Arch::vgg16: {
      static const ArchitectureSpec vgg = make_vgg16();
      return vgg;
    }
    case Arch::resnet18: {
      static const ArchitectureSpec r18 = make_resnet(Arch::resnet18);
      return r18;
    }
    case Arch::resnet50: {
      static const ArchitectureSpec r50 = make_resnet(Arch::resnet50);
      return r50;
    }
#endif
    default: break;
  }
  throw ValidationError(fmt::format("architecture '{}' is not compiled into this build", arch_name(arch)));
}

std::vector<ParamSlot> parameter_slots(const ArchitectureSpec& spec) {
  std::vector<ParamSlot> out;
  for (const auto& l : spec.features) add_layer_slots(out, l, false);
  for (const auto& l : spec.classifier) add_layer_slots(out, l, true);
  return out;
}

std::size_t parameter_count(const ArchitectureSpec& spec) {
  std::size_t n = 0;
  for (const auto& slot : parameter_slots(spec)) {
    if (slot.trainable) n += shape_numel(slot.shape);
  }
  return n;
}

std::vector<Shape> infer_feature_shapes(const ArchitectureSpec& spec, const Shape& input) {
  std::vector<Shape> shapes;
  Shape cur = input;
  for (const auto& layer : spec.features) {
    cur = apply_layer_shape(layer, cur);
    shapes.push_back(cur);
  }
  return shapes;
}

std::vector<Shape> extraction_shapes(const ArchitectureSpec& spec, const Shape& input) {
  const auto all = infer_feature_shapes(spec, input);
  std::vector<Shape> out;
  for (std::size_t i = 0; i < spec.features.size(); ++i) {
    if (spec.features[i].is_extraction_point) out.push_back(all[i]);
  }
  return out;
}

}  // namespace vizsim::nn
