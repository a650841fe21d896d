#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vizsim/tensor.hpp"

namespace vizsim::nn {

enum class Arch { alexnet, squeezenet, vgg16, resnet18, resnet50 };

std::string_view arch_name(Arch arch);
std::optional<Arch> parse_arch(std::string_view name);

/// True for architectures compiled into this build (VGG16/ResNet are optional).
bool arch_available(Arch arch);

enum class LayerKind {
  conv2d,
  batchnorm,
  relu,
  maxpool2d,
  fire,
  residual_block_stack,
  avgpool,
  flatten,
  linear,
};

struct ConvSpec {
  std::size_t in_channels, out_channels, kernel, stride, padding;
  bool bias = true;
};
struct BatchNormSpec {
  std::size_t channels;
};
struct PoolSpec {
  std::size_t kernel, stride, padding = 0;
  bool ceil_mode = false;
};
struct FireSpec {
  std::size_t in_channels, squeeze, expand1x1, expand3x3;
  std::size_t out_channels() const { return expand1x1 + expand3x3; }
};
/// A torchvision-style ResNet layer: `blocks` basic or bottleneck blocks, the
/// first of which carries the stride and an optional projection shortcut.
struct BlockStackSpec {
  std::size_t in_channels, planes, blocks, stride;
  bool bottleneck;
  std::size_t out_channels() const { return bottleneck ? planes * 4 : planes; }
};
struct AvgPoolSpec {
  std::size_t out_h, out_w;  // adaptive output grid
};
struct LinearSpec {
  std::size_t in_features, out_features;
};

using LayerParams =
    std::variant<std::monostate, ConvSpec, BatchNormSpec, PoolSpec, FireSpec, BlockStackSpec, AvgPoolSpec, LinearSpec>;

struct LayerSpec {
  LayerKind kind;
  std::string name;  // parameter prefix in the archive, e.g. "features.3"
  LayerParams params;
  bool is_extraction_point = false;
};

struct ArchitectureSpec {
  Arch arch;
  std::vector<LayerSpec> features;    // backbone, holds every extraction point
  std::vector<LayerSpec> classifier;  // head used only by classify
  std::size_t extraction_layer_count;
};

/// Layer graph for a supported network, with extraction points marked.
/// Throws ValidationError for optional architectures missing from the build.
const ArchitectureSpec& architecture_spec(Arch arch);

enum class ParamRole { weight, bias, bn_gamma, bn_beta, bn_running_mean, bn_running_var };

struct ParamSlot {
  std::string name;
  Shape shape;
  ParamRole role;
  std::size_t fan_in;  // inputs per output unit; 0 for batch-norm slots
  bool trainable;      // running statistics are buffers, not parameters
  bool head;           // belongs to the classifier head
};

std::vector<ParamSlot> parameter_slots(const ArchitectureSpec& spec);

/// Count of trainable parameters (weights and biases, no running statistics).
std::size_t parameter_count(const ArchitectureSpec& spec);

/// Shape after each backbone layer for a given (C, H, W) input. Validates that
/// channel counts chain between consecutive layers.
std::vector<Shape> infer_feature_shapes(const ArchitectureSpec& spec, const Shape& input);

/// Shapes at the extraction points only.
std::vector<Shape> extraction_shapes(const ArchitectureSpec& spec, const Shape& input);

}  // namespace vizsim::nn
