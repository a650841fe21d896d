#include "vizsim/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "vizsim/error.hpp"

namespace vizsim::nn {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(fmt::format("{}: expected rank-{} tensor, got shape {}", what, rank, shape_str(t.shape())));
  }
}

// First output index whose input coordinate o*stride - pad + k is >= 0.
std::size_t first_valid(std::size_t k, std::size_t stride, std::size_t pad) {
  if (k >= pad) return 0;
  return (pad - k + stride - 1) / stride;
}

// One past the last output index whose input coordinate is < extent.
std::size_t end_valid(std::size_t k, std::size_t stride, std::size_t pad, std::size_t extent, std::size_t out) {
  // o*stride + k - pad <= extent - 1  <=>  o <= (extent - 1 + pad - k) / stride
  if (extent + pad < k + 1) return 0;
  return std::min(out, (extent - 1 + pad - k) / stride + 1);
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dParams params) {
  require_rank(input, 3, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  const std::size_t in_c = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t out_c = weight.dim(0), k_h = weight.dim(2), k_w = weight.dim(3);
  const std::size_t s = params.stride, p = params.padding;

  if (weight.dim(1) != in_c) {
    throw ShapeError(fmt::format("conv2d: input has {} channels but weight {} expects {}", in_c,
                                 shape_str(weight.shape()), weight.dim(1)));
  }
  if (s == 0) throw ShapeError("conv2d: stride must be >= 1");
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != out_c)) {
    throw ShapeError(fmt::format("conv2d: bias shape {} does not match {} output channels",
                                 shape_str(bias.shape()), out_c));
  }
  if (in_h + 2 * p < k_h || in_w + 2 * p < k_w) {
    throw ShapeError(fmt::format("conv2d: kernel {}x{} larger than padded input {}x{}", k_h, k_w, in_h + 2 * p,
                                 in_w + 2 * p));
  }

  const std::size_t out_h = (in_h + 2 * p - k_h) / s + 1;
  const std::size_t out_w = (in_w + 2 * p - k_w) / s + 1;
  Tensor out({out_c, out_h, out_w});

  const float* x = input.ptr();
  const float* wt = weight.ptr();
  std::vector<float> acc(out_h * out_w);

  for (std::size_t oc = 0; oc < out_c; ++oc) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (std::size_t ic = 0; ic < in_c; ++ic) {
      const float* plane = x + ic * in_h * in_w;
      const float* kern = wt + (oc * in_c + ic) * k_h * k_w;
      for (std::size_t kh = 0; kh < k_h; ++kh) {
        const std::size_t oh_lo = first_valid(kh, s, p);
        const std::size_t oh_hi = end_valid(kh, s, p, in_h, out_h);
        for (std::size_t kw = 0; kw < k_w; ++kw) {
          const float wv = kern[kh * k_w + kw];
          const std::size_t ow_lo = first_valid(kw, s, p);
          const std::size_t ow_hi = end_valid(kw, s, p, in_w, out_w);
          for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
            const float* row = plane + (oh * s + kh - p) * in_w;
            float* dst = acc.data() + oh * out_w;
            if (s == 1) {
              for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) dst[ow] += wv * row[ow + kw - p];
            } else {
              for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) dst[ow] += wv * row[ow * s + kw - p];
            }
          }
        }
      }
    }
    float* o = out.ptr() + oc * out_h * out_w;
    const float b = bias.empty() ? 0.0f : bias[oc];
    for (std::size_t i = 0; i < acc.size(); ++i) o[i] = acc[i] + b;
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  relu_inplace(out);
  return out;
}

void relu_inplace(Tensor& t) {
  for (float& v : t.data()) v = v > 0.0f ? v : 0.0f;
}

std::size_t pooled_extent(std::size_t in, const Pool2dParams& p) {
  const std::size_t span = in + 2 * p.padding - p.kernel;
  std::size_t out = (p.ceil_mode ? (span + p.stride - 1) / p.stride : span / p.stride) + 1;
  // The last window must start inside the input or left padding.
  if (p.ceil_mode && (out - 1) * p.stride >= in + p.padding) --out;
  return out;
}

Tensor maxpool2d(const Tensor& input, Pool2dParams params) {
  require_rank(input, 3, "maxpool2d input");
  const std::size_t c = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  if (params.stride == 0 || params.kernel == 0) throw ShapeError("maxpool2d: kernel and stride must be >= 1");
  if (params.kernel > in_h + 2 * params.padding || params.kernel > in_w + 2 * params.padding) {
    throw ShapeError(fmt::format("maxpool2d: kernel {} larger than input {}x{}", params.kernel, in_h, in_w));
  }
  if (2 * params.padding > params.kernel) throw ShapeError("maxpool2d: padding exceeds half the kernel");

  const std::size_t out_h = pooled_extent(in_h, params), out_w = pooled_extent(in_w, params);
  Tensor out({c, out_h, out_w});
  const auto pad = static_cast<std::ptrdiff_t>(params.padding);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      const std::ptrdiff_t h0 = static_cast<std::ptrdiff_t>(oh * params.stride) - pad;
      const std::ptrdiff_t h_lo = std::max<std::ptrdiff_t>(h0, 0);
      const std::ptrdiff_t h_hi = std::min<std::ptrdiff_t>(h0 + params.kernel, in_h);
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        const std::ptrdiff_t w0 = static_cast<std::ptrdiff_t>(ow * params.stride) - pad;
        const std::ptrdiff_t w_lo = std::max<std::ptrdiff_t>(w0, 0);
        const std::ptrdiff_t w_hi = std::min<std::ptrdiff_t>(w0 + params.kernel, in_w);
        float m = -std::numeric_limits<float>::infinity();
        for (auto h = h_lo; h < h_hi; ++h) {
          for (auto w = w_lo; w < w_hi; ++w) m = std::max(m, input.at(ch, h, w));
        }
        out.at(ch, oh, ow) = m;
      }
    }
  }
  return out;
}

Tensor adaptive_avgpool2d(const Tensor& input, std::size_t out_h, std::size_t out_w) {
  require_rank(input, 3, "adaptive_avgpool2d input");
  const std::size_t c = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  Tensor out({c, out_h, out_w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      const std::size_t h_lo = oh * in_h / out_h, h_hi = ((oh + 1) * in_h + out_h - 1) / out_h;
      for (std::size_t ow = 0; ow < out_w; ++ow) {
        const std::size_t w_lo = ow * in_w / out_w, w_hi = ((ow + 1) * in_w + out_w - 1) / out_w;
        float sum = 0.0f;
        for (std::size_t h = h_lo; h < h_hi; ++h) {
          for (std::size_t w = w_lo; w < w_hi; ++w) sum += input.at(ch, h, w);
        }
        out.at(ch, oh, ow) = sum / static_cast<float>((h_hi - h_lo) * (w_hi - w_lo));
      }
    }
  }
  return out;
}

Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, const Tensor& running_mean,
                   const Tensor& running_var, float eps) {
  require_rank(input, 3, "batchnorm2d input");
  const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
  for (const Tensor* t : {&gamma, &beta, &running_mean, &running_var}) {
    if (t->size() != c) {
      throw ShapeError(fmt::format("batchnorm2d: parameter of size {} for {} channels", t->size(), c));
    }
  }
  Tensor out(input.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float scale = gamma[ch] / std::sqrt(running_var[ch] + eps);
    const float shift = beta[ch] - running_mean[ch] * scale;
    const float* src = input.ptr() + ch * plane;
    float* dst = out.ptr() + ch * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
  }
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank(weight, 2, "linear weight");
  const std::size_t out_n = weight.dim(0), in_n = weight.dim(1);
  if (input.size() != in_n) {
    throw ShapeError(fmt::format("linear: input has {} features, weight {} expects {}", input.size(),
                                 shape_str(weight.shape()), in_n));
  }
  if (!bias.empty() && bias.size() != out_n) {
    throw ShapeError(fmt::format("linear: bias of size {} for {} outputs", bias.size(), out_n));
  }
  Tensor out({out_n});
  for (std::size_t o = 0; o < out_n; ++o) {
    const float* row = weight.ptr() + o * in_n;
    float acc = 0.0f;
    for (std::size_t i = 0; i < in_n; ++i) acc += row[i] * input[i];
    out[o] = acc + (bias.empty() ? 0.0f : bias[o]);
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat input");
  require_rank(b, 3, "concat input");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw ShapeError(fmt::format("concat: spatial mismatch {} vs {}", shape_str(a.shape()), shape_str(b.shape())));
  }
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("add: shape mismatch {} vs {}", shape_str(a.shape()), shape_str(b.shape())));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor fire_forward(const Tensor& input, const FireParams& params) {
  if (!params.squeeze_weight || !params.squeeze_bias || !params.expand1x1_weight || !params.expand1x1_bias ||
      !params.expand3x3_weight || !params.expand3x3_bias) {
    throw ValidationError("fire: missing parameter tensor");
  }
  const std::size_t squeeze = params.squeeze_weight->dim(0);
  if (params.expand1x1_weight->dim(1) != squeeze || params.expand3x3_weight->dim(1) != squeeze) {
    throw ShapeError(fmt::format("fire: squeeze width {} does not feed expand weights {} / {}", squeeze,
                                 shape_str(params.expand1x1_weight->shape()),
                                 shape_str(params.expand3x3_weight->shape())));
  }
  Tensor s = conv2d(input, *params.squeeze_weight, *params.squeeze_bias, {1, 0});
  relu_inplace(s);
  Tensor e1 = conv2d(s, *params.expand1x1_weight, *params.expand1x1_bias, {1, 0});
  relu_inplace(e1);
  Tensor e3 = conv2d(s, *params.expand3x3_weight, *params.expand3x3_bias, {1, 1});
  relu_inplace(e3);
  return concat_channels(e1, e3);
}

}  // namespace vizsim::nn
