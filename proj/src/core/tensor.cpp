// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace tfmlp {

std::size_t dtype_size(DType dtype) noexcept {
  switch (dtype) {
    case DType::kF32: return 4;
    case DType::kBF16: return 2;
    case DType::kI8: return 1;
    case DType::kI16: return 2;
    case DType::kI32: return 4;
  }
  return 0;
}

const char* to_string(DType dtype) noexcept {
  switch (dtype) {
    case DType::kF32: return "f32";
    case DType::kBF16: return "bf16";
    case DType::kI8: return "i8";
    case DType::kI16: return "i16";
    case DType::kI32: return "i32";
  }
  return "?";
}

std::size_t shape_numel(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<std::size_t>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void check_finite(std::span<const float> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      raise(ErrorKind::kNumeric, what + " has a non-finite value at element " +
                                     std::to_string(i));
    }
  }
}

void bf16_round_inplace(std::span<float> values) noexcept {
  for (float& v : values) v = bf16_round(v);
}

namespace {

// Range reduction to [-ln2/2, ln2/2] plus a degree-6 polynomial; within
// 2 ulp of expf on [-87, 88] and written without branches so loops over it
// vectorize.
inline float exp_poly(float x) noexcept {
  x = std::min(std::max(x, -87.0f), 88.0f);
  const float n = (x * 1.44269504088896341f + 12582912.0f) - 12582912.0f;
  float r = x - n * 0.693359375f;
  r = r - n * -2.12194440e-4f;
  float p = 1.9875691500e-4f;
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r * r + r + 1.0f;
  const std::int32_t e = (static_cast<std::int32_t>(n) + 127) << 23;
  return p * std::bit_cast<float>(e);
}

inline float sigmoid_poly(float x) noexcept { return 1.0f / (1.0f + exp_poly(-x)); }

inline float tanh_poly(float x) noexcept {
  // 1 - 2 / (e^{2x} + 1), odd-symmetrized.
  const float a = std::fabs(x);
  const float t = 1.0f - 2.0f / (exp_poly(2.0f * a) + 1.0f);
  return std::copysign(t, x);
}

}  // namespace

float sigmoid(float x) noexcept { return sigmoid_poly(x); }
float fast_tanh(float x) noexcept { return tanh_poly(x); }

void activate_inplace(std::span<float> x, Activation kind) noexcept {
  switch (kind) {
    case Activation::kRelu:
      for (float& v : x) v = relu(v);
      break;
    case Activation::kSigmoid:
      for (float& v : x) v = sigmoid_poly(v);
      break;
    case Activation::kTanh:
      for (float& v : x) v = tanh_poly(v);
      break;
  }
}

Tensor activate(const Tensor& x, Activation kind) {
  Tensor y = x;
  activate_inplace(y.data(), kind);
  return y;
}

// ---------------------------------------------------------------------------

Shape ConvSpec::weight_shape() const {
  if (transposed) return {in_channels, out_channels, kernel_f, kernel_t};
  return {out_channels, in_channels, kernel_f, kernel_t};
}

void ConvSpec::validate() const {
  require(in_channels >= 1 && out_channels >= 1, "conv channel counts must be >= 1");
  require(kernel_f >= 1 && kernel_t >= 1, "conv kernel sizes must be >= 1");
  require(kernel_f % 2 == 1, "frequency kernel must be odd for symmetric padding");
  require(stride_f == 1 && stride_t == 1, "2D causal convs support stride 1 only");
}

Tensor zero_history(const ConvSpec& spec, std::size_t freq_bins) {
  if (spec.history_frames() == 0) return {};
  return Tensor({spec.in_channels, freq_bins, spec.history_frames()});
}

namespace {

struct PaddedSequence {
  const Tensor& input;
  const Tensor& history;
  std::size_t hist_frames;
  std::size_t frames;  // input frames

  float at(std::size_t c, std::size_t f, std::size_t tau) const {
    if (tau < hist_frames) return history[(c * input.dim(1) + f) * hist_frames + tau];
    return input[(c * input.dim(1) + f) * frames + (tau - hist_frames)];
  }
};

void check_sequence(const Tensor& input, const Tensor& history, std::size_t kernel_t) {
  require(input.rank() == 3, "conv input must be [C x F x T], got " +
                                 shape_string(input.shape()));
  const std::size_t hist = kernel_t - 1;
  if (hist == 0) return;
  require(history.shape() == Shape({input.dim(0), input.dim(1), hist}),
          "conv history must be " +
              shape_string({input.dim(0), input.dim(1), hist}) + ", got " +
              shape_string(history.shape()));
}

}  // namespace

Tensor im2col_causal(const Tensor& input, const Tensor& history, std::size_t kernel_f,
                     std::size_t kernel_t) {
  check_sequence(input, history, kernel_t);
  const std::size_t channels = input.dim(0), bins = input.dim(1), frames = input.dim(2);
  const std::size_t pad = (kernel_f - 1) / 2;
  const PaddedSequence seq{input, history, kernel_t - 1, frames};
  Tensor cols({channels * kernel_f * kernel_t, bins * frames});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t a = 0; a < kernel_f; ++a) {
      for (std::size_t b = 0; b < kernel_t; ++b) {
        float* dst = cols.row((c * kernel_f + a) * kernel_t + b).data();
        for (std::size_t f = 0; f < bins; ++f) {
          const std::ptrdiff_t src_f = static_cast<std::ptrdiff_t>(f + a) -
                                       static_cast<std::ptrdiff_t>(pad);
          if (src_f < 0 || src_f >= static_cast<std::ptrdiff_t>(bins)) continue;
          for (std::size_t t = 0; t < frames; ++t) {
            dst[f * frames + t] = seq.at(c, static_cast<std::size_t>(src_f), t + b);
          }
        }
      }
    }
  }
  return cols;
}

Tensor im2col_transposed_causal(const Tensor& input, const Tensor& history,
                                std::size_t kernel_f, std::size_t kernel_t) {
  check_sequence(input, history, kernel_t);
  const std::size_t channels = input.dim(0), bins = input.dim(1), frames = input.dim(2);
  const std::size_t pad = (kernel_f - 1) / 2;
  const PaddedSequence seq{input, history, kernel_t - 1, frames};
  Tensor cols({channels * kernel_f * kernel_t, bins * frames});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t a = 0; a < kernel_f; ++a) {
      for (std::size_t b = 0; b < kernel_t; ++b) {
        float* dst = cols.row((c * kernel_f + a) * kernel_t + b).data();
        for (std::size_t f = 0; f < bins; ++f) {
          const std::ptrdiff_t src_f = static_cast<std::ptrdiff_t>(f + pad) -
                                       static_cast<std::ptrdiff_t>(a);
          if (src_f < 0 || src_f >= static_cast<std::ptrdiff_t>(bins)) continue;
          for (std::size_t t = 0; t < frames; ++t) {
            dst[f * frames + t] =
                seq.at(c, static_cast<std::size_t>(src_f), t + kernel_t - 1 - b);
          }
        }
      }
    }
  }
  return cols;
}

Tensor advance_history(const Tensor& input, const Tensor& history) {
  if (history.empty()) return {};
  const std::size_t channels = input.dim(0), bins = input.dim(1), frames = input.dim(2);
  const std::size_t hist = history.dim(2);
  const PaddedSequence seq{input, history, hist, frames};
  Tensor next({channels, bins, hist});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t f = 0; f < bins; ++f) {
      for (std::size_t h = 0; h < hist; ++h) {
        next[(c * bins + f) * hist + h] = seq.at(c, f, frames + h);
      }
    }
  }
  return next;
}

ConvResult conv2d_causal(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                         const Tensor& bias, const Tensor& history) {
  spec.validate();
  require(!spec.transposed, "conv2d_causal called with a transposed spec");
  require(weights.shape() == spec.weight_shape(),
          "conv weights must be " + shape_string(spec.weight_shape()) + ", got " +
              shape_string(weights.shape()));
  require(bias.shape() == Shape({spec.out_channels}), "conv bias must be [C_out]");
  require(input.rank() == 3 && input.dim(0) == spec.in_channels,
          "conv input channels do not match spec");
  check_finite(input.data(), "conv input");
  const Tensor cols = im2col_causal(input, history, spec.kernel_f, spec.kernel_t);
  const Tensor matrix = weights.reshaped(
      {spec.out_channels, spec.in_channels * spec.kernel_f * spec.kernel_t});
  Tensor out = conv1d_k1(cols, matrix, bias);
  out.reshape({spec.out_channels, input.dim(1), input.dim(2)});
  return {std::move(out), advance_history(input, history)};
}

ConvResult conv_transpose2d_causal(const Tensor& input, const ConvSpec& spec,
                                   const Tensor& weights, const Tensor& bias,
                                   const Tensor& history) {
  spec.validate();
  require(spec.transposed, "conv_transpose2d_causal needs a transposed spec");
  require(weights.shape() == spec.weight_shape(),
          "transposed conv weights must be " + shape_string(spec.weight_shape()) +
              ", got " + shape_string(weights.shape()));
  require(bias.shape() == Shape({spec.out_channels}), "conv bias must be [C_out]");
  require(input.rank() == 3 && input.dim(0) == spec.in_channels,
          "transposed conv input channels do not match spec");
  check_finite(input.data(), "transposed conv input");
  const Tensor cols = im2col_transposed_causal(input, history, spec.kernel_f, spec.kernel_t);
  const std::size_t taps = spec.kernel_f * spec.kernel_t;
  Tensor matrix({spec.out_channels, spec.in_channels * taps});
  for (std::size_t i = 0; i < spec.in_channels; ++i) {
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      for (std::size_t k = 0; k < taps; ++k) {
        matrix[o * spec.in_channels * taps + i * taps + k] =
            weights[(i * spec.out_channels + o) * taps + k];
      }
    }
  }
  Tensor out = conv1d_k1(cols, matrix, bias);
  out.reshape({spec.out_channels, input.dim(1), input.dim(2)});
  return {std::move(out), advance_history(input, history)};
}

void conv1d_k1_into(std::span<const float> input, std::size_t in_channels,
                    std::size_t columns, std::span<const float> weights,
                    std::size_t out_channels, std::span<const float> bias,
                    std::span<float> output) noexcept {
  // Four output rows share each input load; columns are tiled so the
  // accumulators stay in L1. Every output keeps the order bias, i = 0, 1, ...
  constexpr std::size_t kRows = 4;
  constexpr std::size_t kTile = 64;
  float acc[kRows][kTile];
  std::size_t o = 0;
  for (; o + kRows <= out_channels; o += kRows) {
    const float* w0 = weights.data() + o * in_channels;
    const float* w1 = w0 + in_channels;
    const float* w2 = w1 + in_channels;
    const float* w3 = w2 + in_channels;
    for (std::size_t n0 = 0; n0 < columns; n0 += kTile) {
      const std::size_t nn = std::min(kTile, columns - n0);
      for (std::size_t r = 0; r < kRows; ++r) {
        const float b = bias.empty() ? 0.0f : bias[o + r];
        for (std::size_t n = 0; n < nn; ++n) acc[r][n] = b;
      }
      for (std::size_t i = 0; i < in_channels; ++i) {
        const float* __restrict src = input.data() + i * columns + n0;
        const float a0 = w0[i], a1 = w1[i], a2 = w2[i], a3 = w3[i];
        for (std::size_t n = 0; n < nn; ++n) {
          const float v = src[n];
          acc[0][n] += a0 * v;
          acc[1][n] += a1 * v;
          acc[2][n] += a2 * v;
          acc[3][n] += a3 * v;
        }
      }
      for (std::size_t r = 0; r < kRows; ++r) {
        std::copy_n(acc[r], nn, output.data() + (o + r) * columns + n0);
      }
    }
  }
  for (; o < out_channels; ++o) {
    float* __restrict dst = output.data() + o * columns;
    const float b = bias.empty() ? 0.0f : bias[o];
    for (std::size_t n = 0; n < columns; ++n) dst[n] = b;
    const float* w = weights.data() + o * in_channels;
    for (std::size_t i = 0; i < in_channels; ++i) {
      const float wi = w[i];
      const float* __restrict src = input.data() + i * columns;
      for (std::size_t n = 0; n < columns; ++n) dst[n] += wi * src[n];
    }
  }
}

Tensor conv1d_k1(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require(input.rank() == 2, "conv1d_k1 input must be [C_in x N], got " +
                                 shape_string(input.shape()));
  require(weights.rank() == 2 && weights.dim(1) == input.dim(0),
          "conv1d_k1 weights " + shape_string(weights.shape()) +
              " do not match input channels " + std::to_string(input.dim(0)));
  require(bias.empty() || bias.shape() == Shape({weights.dim(0)}),
          "conv1d_k1 bias must be [C_out]");
  Tensor out({weights.dim(0), input.dim(1)});
  conv1d_k1_into(input.data(), input.dim(0), input.dim(1), weights.data(), weights.dim(0),
                 bias.data(), out.data());
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require(input.rank() >= 1, "linear input needs at least one dimension");
  require(weights.rank() == 2, "linear weights must be [M x N]");
  const std::size_t n = weights.dim(1), m = weights.dim(0);
  require(input.shape().back() == n, "linear trailing dim " +
                                         std::to_string(input.shape().back()) +
                                         " != " + std::to_string(n));
  require(bias.empty() || bias.shape() == Shape({m}), "linear bias must be [M]");
  Shape out_shape = input.shape();
  out_shape.back() = m;
  Tensor out(out_shape);
  const std::size_t rows = input.size() / n;
  for (std::size_t r = 0; r < rows; ++r) {
    const float* x = input.ptr() + r * n;
    for (std::size_t j = 0; j < m; ++j) {
      const float* w = weights.ptr() + j * n;
      float acc = bias.empty() ? 0.0f : bias[j];
      for (std::size_t k = 0; k < n; ++k) acc += w[k] * x[k];
      out[r * m + j] = acc;
    }
  }
  return out;
}

Tensor conv1d_strided(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      std::size_t stride) {
  require(input.rank() == 2, "strided conv input must be [C x F]");
  require(weights.rank() == 3 && weights.dim(1) == input.dim(0) && weights.dim(2) == stride,
          "strided conv weights must be [C_out x C_in x stride]");
  require(bias.shape() == Shape({weights.dim(0)}), "strided conv bias must be [C_out]");
  const std::size_t c_in = input.dim(0), bins = input.dim(1), c_out = weights.dim(0);
  const std::size_t out_bins = (bins + stride - 1) / stride;
  Tensor out({c_out, out_bins});
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t j = 0; j < out_bins; ++j) {
      float acc = bias[o];
      for (std::size_t i = 0; i < c_in; ++i) {
        for (std::size_t k = 0; k < stride; ++k) {
          const std::size_t f = j * stride + k;
          if (f < bins) acc += weights[(o * c_in + i) * stride + k] * input[i * bins + f];
        }
      }
      out[o * out_bins + j] = acc;
    }
  }
  return out;
}

Tensor conv_transpose1d_strided(const Tensor& input, const Tensor& weights,
                                const Tensor& bias, std::size_t stride,
                                std::size_t out_bins) {
  require(input.rank() == 2, "strided transposed conv input must be [C x F]");
  require(weights.rank() == 3 && weights.dim(0) == input.dim(0) && weights.dim(2) == stride,
          "strided transposed conv weights must be [C_in x C_out x stride]");
  const std::size_t c_in = input.dim(0), bins = input.dim(1), c_out = weights.dim(1);
  require(bias.shape() == Shape({c_out}), "strided transposed conv bias must be [C_out]");
  require(out_bins <= bins * stride && out_bins > (bins - 1) * stride,
          "strided transposed conv output size inconsistent with input");
  Tensor out({c_out, out_bins});
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t f = 0; f < out_bins; ++f) {
      const std::size_t j = f / stride, k = f % stride;
      float acc = bias[o];
      for (std::size_t i = 0; i < c_in; ++i) {
        acc += weights[(i * c_out + o) * stride + k] * input[i * bins + j];
      }
      out[o * out_bins + f] = acc;
    }
  }
  return out;
}

Tensor transpose2d(const Tensor& x) {
  require(x.rank() == 2, "transpose2d expects a matrix");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out({cols, rows});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = x[r * cols + c];
  return out;
}

Tensor swap_leading_axes(const Tensor& x) {
  require(x.rank() == 3, "swap_leading_axes expects rank 3");
  const std::size_t a = x.dim(0), b = x.dim(1), c = x.dim(2);
  Tensor out({b, a, c});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      std::copy_n(x.ptr() + (i * b + j) * c, c, out.ptr() + (j * a + i) * c);
  return out;
}

}  // namespace tfmlp
