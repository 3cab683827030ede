// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_QUANT_HPP_
#define TFMLP_CORE_QUANT_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace tfmlp {

enum class Precision { kF32, kBF16, kInt8, kInt16 };

const char* to_string(Precision p) noexcept;
Precision parse_precision(const std::string& name);
inline bool is_integer(Precision p) noexcept {
  return p == Precision::kInt8 || p == Precision::kInt16;
}
inline int precision_bits(Precision p) noexcept { return p == Precision::kInt16 ? 16 : 8; }

// Smallest scale produced by calibration; guards all-zero tensors.
inline constexpr float kScaleFloor = 1e-8f;

// Affine integer mapping q = clamp(round(x / scale) + zero_point). One scale
// means per-tensor; more means per output channel (rows of the matrix form).
struct QuantParams {
  std::vector<float> scale{1.0f};
  std::int32_t zero_point = 0;
  int bits = 8;
  bool symmetric = false;
  // Observed ranges the parameters were derived from (informational).
  std::vector<float> observed_min;
  std::vector<float> observed_max;

  std::int32_t qmin() const noexcept { return -(1 << (bits - 1)); }
  std::int32_t qmax() const noexcept { return (1 << (bits - 1)) - 1; }
  std::size_t channels() const noexcept { return scale.size(); }
  float channel_scale(std::size_t c) const noexcept {
    return scale.size() == 1 ? scale[0] : scale[c];
  }
  void validate() const;

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// Symmetric parameters from per-channel |max|: scale = absmax / qmax.
QuantParams symmetric_params(std::span<const float> channel_absmax, int bits);
// Asymmetric per-tensor parameters from an observed [lo, hi] range. The
// range is widened to contain zero so that zero is exactly representable.
QuantParams asymmetric_params(float lo, float hi, int bits);

// Round half to even under the default floating-point environment.
inline double round_half_even(double v) noexcept { return std::nearbyint(v); }

inline std::int32_t quantize_value(float x, float scale, std::int32_t zero_point,
                                   std::int32_t qmin, std::int32_t qmax) noexcept {
  double q = round_half_even(static_cast<double>(x) / static_cast<double>(scale)) + zero_point;
  if (q < qmin) q = qmin;
  if (q > qmax) q = qmax;
  return static_cast<std::int32_t>(q);
}

inline float dequantize_value(std::int32_t q, float scale, std::int32_t zero_point) noexcept {
  return static_cast<float>(static_cast<double>(q - zero_point) * static_cast<double>(scale));
}

// Scalar quantize-dequantize.
float fake_quant(float x, float scale, std::int32_t zero_point, std::int32_t qmin,
                 std::int32_t qmax) noexcept;

// Per-tensor, or per-channel over rows when qp has several scales.
Tensor fake_quant(const Tensor& x, const QuantParams& qp);
void fake_quant_inplace(std::span<float> x, const QuantParams& qp);

// Running min/max per channel (rows of the observed buffer).
class RangeObserver {
 public:
  explicit RangeObserver(std::size_t channels = 1) : min_(channels), max_(channels) {}

  void observe(std::span<const float> values);
  std::size_t channels() const noexcept { return min_.size(); }
  std::size_t count() const noexcept { return count_; }
  const std::vector<float>& min() const noexcept { return min_; }
  const std::vector<float>& max() const noexcept { return max_; }

 private:
  std::vector<float> min_;
  std::vector<float> max_;
  std::size_t count_ = 0;
};

// Precision of one graph node plus its parameters when integer.
struct Assignment {
  Precision precision = Precision::kF32;
  std::optional<QuantParams> qp;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Rounds or fake-quantizes `x` in place according to `a`.
void apply_assignment(std::span<float> x, const Assignment& a);

// ---------------------------------------------------------------------------
// Integer kernels

// Symmetric int8 weights in matrix form [rows x cols] with per-row scales.
struct QuantizedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> values;
  std::vector<float> scale;
};

QuantizedMatrix quantize_weights(std::span<const float> weights, std::size_t rows,
                                 std::size_t cols, const QuantParams& qp);

// Bias pre-scaled to the accumulator grid scale_in * scale_w[row].
std::vector<std::int32_t> quantize_bias(std::span<const float> bias, float input_scale,
                                        const QuantizedMatrix& weights);

template <typename Q>
BasicTensor<Q> quantize_tensor(const Tensor& x, const QuantParams& qp);

template <typename Q>
Tensor dequantize_tensor(const BasicTensor<Q>& q, const QuantParams& qp);

// Accumulates sum_i (q_in[i, n] - zp_in) * w[o, i] + bias[o] into `acc`
// [rows x columns]. int8 inputs use 32-bit accumulators, int16 inputs 64-bit.
void int_gemm(std::span<const std::int8_t> q_in, std::int32_t zp_in, std::size_t columns,
              const QuantizedMatrix& w, std::span<const std::int32_t> bias,
              std::span<std::int32_t> acc);
void int_gemm(std::span<const std::int16_t> q_in, std::int32_t zp_in, std::size_t columns,
              const QuantizedMatrix& w, std::span<const std::int32_t> bias,
              std::span<std::int64_t> acc);

// Requantizes one accumulator of output row `row` to the output grid.
inline std::int32_t requantize(std::int64_t acc, double multiplier, std::int32_t zero_point,
                               std::int32_t qmin, std::int32_t qmax) noexcept {
  double q = round_half_even(static_cast<double>(acc) * multiplier) + zero_point;
  if (q < qmin) q = qmin;
  if (q > qmax) q = qmax;
  return static_cast<std::int32_t>(q);
}

// Integer kernel-1 convolution: int8 activations, int8 per-channel weights,
// i32 bias at scale_in * scale_w, requantized to `out_qp`.
TensorI8 int8_conv1d_k1(const TensorI8& q_input, const QuantParams& in_qp,
                        const TensorI8& q_weights, const QuantParams& weight_qp,
                        const TensorI32& bias, const QuantParams& out_qp);

}  // namespace tfmlp

#endif  // TFMLP_CORE_QUANT_HPP_
