#pragma once

#include <cstddef>

#include "vizsim/tensor.hpp"

// Layer primitives over channels-first (C, H, W) tensors. Weights follow the
// (out, in, kh, kw) convention. All functions are pure.
namespace vizsim::nn {

struct Conv2dParams {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Direct cross-correlation with zero padding. `bias` may be empty.
/// Each output element accumulates in (in-channel, kernel row, kernel col)
/// order, then adds the bias, so results do not depend on threading.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dParams params);

Tensor relu(const Tensor& input);
void relu_inplace(Tensor& t);

struct Pool2dParams {
  std::size_t kernel = 2;
  std::size_t stride = 2;
  std::size_t padding = 0;
  bool ceil_mode = false;
};

std::size_t pooled_extent(std::size_t in, const Pool2dParams& p);

/// Windowed maximum; padded cells never win.
Tensor maxpool2d(const Tensor& input, Pool2dParams params);

/// Adaptive average pooling to a fixed (out_h, out_w) grid.
Tensor adaptive_avgpool2d(const Tensor& input, std::size_t out_h, std::size_t out_w);

/// Inference-mode batch normalization with running statistics.
Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, const Tensor& running_mean,
                   const Tensor& running_var, float eps = 1e-5f);

/// y = W x + b for a flattened input; W is (out, in).
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Channel concatenation of two tensors with equal spatial extent.
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);

struct FireParams {
  const Tensor* squeeze_weight = nullptr;
  const Tensor* squeeze_bias = nullptr;
  const Tensor* expand1x1_weight = nullptr;
  const Tensor* expand1x1_bias = nullptr;
  const Tensor* expand3x3_weight = nullptr;
  const Tensor* expand3x3_bias = nullptr;
};

/// SqueezeNet fire module:
/// concat(relu(expand1x1(s)), relu(expand3x3(s))) with s = relu(squeeze(x)).
Tensor fire_forward(const Tensor& input, const FireParams& params);

}  // namespace vizsim::nn
