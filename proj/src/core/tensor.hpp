// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_TENSOR_HPP_
#define TFMLP_CORE_TENSOR_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"

namespace tfmlp {

// Storage element types. bf16 values are carried in f32 storage after
// rounding; the dtype tag only matters for serialization.
enum class DType : std::uint8_t { kF32 = 0, kBF16 = 1, kI8 = 2, kI16 = 3, kI32 = 4 };

std::size_t dtype_size(DType dtype) noexcept;
const char* to_string(DType dtype) noexcept;

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

// Dense row-major tensor. Every dimension is >= 1; a default-constructed
// tensor is the empty placeholder with no shape.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{})
      : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    require(checked_numel(shape_) == data_.size(),
            "tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + shape_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  std::size_t offset(std::initializer_list<std::size_t> index) const {
    require(index.size() == shape_.size(), "index rank mismatch");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
      require(i < shape_[axis], "index out of range");
      flat = flat * shape_[axis] + i;
      ++axis;
    }
    return flat;
  }

  T& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  const T& at(std::initializer_list<std::size_t> index) const {
    return data_[offset(index)];
  }

  // Row `r` of the tensor viewed as [dim(0) x rest].
  std::span<T> row(std::size_t r) noexcept {
    const std::size_t n = data_.size() / shape_[0];
    return std::span<T>(data_).subspan(r * n, n);
  }
  std::span<const T> row(std::size_t r) const noexcept {
    const std::size_t n = data_.size() / shape_[0];
    return std::span<const T>(data_).subspan(r * n, n);
  }

  void reshape(Shape shape) {
    require(checked_numel(shape) == data_.size(),
            "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    shape_ = std::move(shape);
  }

  BasicTensor reshaped(Shape shape) const& {
    BasicTensor out = *this;
    out.reshape(std::move(shape));
    return out;
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  static std::size_t checked_numel(const Shape& shape) {
    for (std::size_t d : shape) require(d >= 1, "tensor dimensions must be >= 1");
    return shape_numel(shape);
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorI8 = BasicTensor<std::int8_t>;
using TensorI16 = BasicTensor<std::int16_t>;
using TensorI32 = BasicTensor<std::int32_t>;

// Throws a numeric error naming `what` if any element is NaN or infinite.
void check_finite(std::span<const float> values, const std::string& what);

// ---------------------------------------------------------------------------
// bfloat16 emulation

// Rounds to the nearest bfloat16 value (ties to even) and returns it as f32.
inline float bf16_round(float x) noexcept {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
  if ((bits & 0x7f800000u) == 0x7f800000u) {
    // Inf stays Inf; NaN stays a quiet NaN after truncation.
    if (bits & 0x007fffffu) bits |= 0x00400000u;
    return std::bit_cast<float>(bits & 0xffff0000u);
  }
  bits += 0x7fffu + ((bits >> 16) & 1u);
  return std::bit_cast<float>(bits & 0xffff0000u);
}

inline std::uint16_t bf16_bits(float bf16_value) noexcept {
  return static_cast<std::uint16_t>(std::bit_cast<std::uint32_t>(bf16_value) >> 16);
}

inline float bf16_from_bits(std::uint16_t bits) noexcept {
  return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
}

void bf16_round_inplace(std::span<float> values) noexcept;

// ---------------------------------------------------------------------------
// Elementwise activations

enum class Activation { kRelu, kSigmoid, kTanh };

inline float relu(float x) noexcept { return x > 0.0f ? x : 0.0f; }
// Polynomial exp based; within a few ulp of the libm forms.
float sigmoid(float x) noexcept;
float fast_tanh(float x) noexcept;

Tensor activate(const Tensor& x, Activation kind);
void activate_inplace(std::span<float> x, Activation kind) noexcept;

// ---------------------------------------------------------------------------
// Convolutions. Frame sequences use the [channels x freq x time] layout.

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_f = 3;
  std::size_t kernel_t = 3;
  std::size_t stride_f = 1;
  std::size_t stride_t = 1;
  bool transposed = false;

  // Frequency padding on each side; keeps the bin count for stride 1.
  std::size_t pad_f() const noexcept { return (kernel_f - 1) / 2; }
  // Past frames a streaming caller must retain.
  std::size_t history_frames() const noexcept { return kernel_t - 1; }

  // Weight layout: [out, in, kf, kt] for convolution, [in, out, kf, kt]
  // for the transposed variant.
  Shape weight_shape() const;
  void validate() const;
};

struct ConvResult {
  Tensor output;
  Tensor history;
};

// Zero history of the right shape for a stream with `freq_bins` bins.
Tensor zero_history(const ConvSpec& spec, std::size_t freq_bins);

// Unfolds [C x F x T] (preceded by `history` frames) into a
// [C*kf*kt x F*T] column matrix for a causal convolution. Column (f, t) is
// stored at f*T + t. Row (c, a, b) multiplies weight[o, c, a, b], where tap
// b == kt-1 is the current frame.
Tensor im2col_causal(const Tensor& input, const Tensor& history, std::size_t kernel_f,
                     std::size_t kernel_t);

// Same for a stride-1 causal transposed convolution: row (c, a, b) gathers
// input[c, f + pad - a, t - b], so tap b == 0 is the current frame.
Tensor im2col_transposed_causal(const Tensor& input, const Tensor& history,
                                std::size_t kernel_f, std::size_t kernel_t);

// Last kt-1 frames of concat(history, input) along time.
Tensor advance_history(const Tensor& input, const Tensor& history);

ConvResult conv2d_causal(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                         const Tensor& bias, const Tensor& history);

ConvResult conv_transpose2d_causal(const Tensor& input, const ConvSpec& spec,
                                   const Tensor& weights, const Tensor& bias,
                                   const Tensor& history);

// output[:, n] = weights * input[:, n] + bias for every column n.
Tensor conv1d_k1(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Same arithmetic writing into caller-owned storage; `bias` may be empty.
void conv1d_k1_into(std::span<const float> input, std::size_t in_channels,
                    std::size_t columns, std::span<const float> weights,
                    std::size_t out_channels, std::span<const float> bias,
                    std::span<float> output) noexcept;

// Affine map over the trailing dimension, broadcast over leading dims.
Tensor linear(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Strided 1D convolution along frequency with kernel == stride; input is
// zero padded on the right up to ceil(F / stride) windows.
// weights: [C_out, C_in, stride].
Tensor conv1d_strided(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      std::size_t stride);

// Matching transposed convolution; weights: [C_in, C_out, stride]. The
// output is cropped to `out_bins`.
Tensor conv_transpose1d_strided(const Tensor& input, const Tensor& weights,
                                const Tensor& bias, std::size_t stride,
                                std::size_t out_bins);

Tensor transpose2d(const Tensor& x);

// [A x B x C] -> [B x A x C].
Tensor swap_leading_axes(const Tensor& x);

}  // namespace tfmlp

#endif  // TFMLP_CORE_TENSOR_HPP_
