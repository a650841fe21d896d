#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vizsim/nn/architecture.hpp"
#include "vizsim/nn/archive.hpp"
#include "vizsim/tensor.hpp"

namespace vizsim::nn {

/// Activations at an architecture's extraction points, shallowest first.
struct FeatureStack {
  Arch arch = Arch::alexnet;
  std::vector<Tensor> layers;
  bool normalized = false;
};

/// Smallest spatial extent accepted by forward passes.
inline constexpr std::size_t kMinInputExtent = 64;

/// Runs the backbone on a (3, H, W) model-input tensor and returns the raw
/// (unnormalized) activations at every extraction point. Pure: identical
/// inputs give bitwise identical outputs.
FeatureStack forward_features(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights);

/// Full forward pass through the classifier head.
Tensor classify_logits(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights);

/// Index of the largest logit.
std::size_t classify_sanity(const Tensor& image, const ArchitectureSpec& spec, const TensorArchive& weights);

/// Fills every parameter slot (head included) reproducibly from `seed`.
/// Conv/linear weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in));
/// batch-norm gamma=1, beta=0, running mean 0, running var 1.
TensorArchive random_init(const ArchitectureSpec& spec, std::uint64_t seed);

}  // namespace vizsim::nn
