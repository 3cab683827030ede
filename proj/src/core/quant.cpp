// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/quant.hpp"

#include <algorithm>
#include <limits>

namespace tfmlp {

const char* to_string(Precision p) noexcept {
  switch (p) {
    case Precision::kF32: return "f32";
    case Precision::kBF16: return "bf16";
    case Precision::kInt8: return "int8";
    case Precision::kInt16: return "int16";
  }
  return "?";
}

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::kF32;
  if (name == "bf16") return Precision::kBF16;
  if (name == "int8") return Precision::kInt8;
  if (name == "int16") return Precision::kInt16;
  raise(ErrorKind::kConfig, "unknown precision '" + name + "'");
}

void QuantParams::validate() const {
  require(bits == 8 || bits == 16, "quantization bit width must be 8 or 16");
  require(!scale.empty(), "quantization scale missing");
  for (float s : scale) {
    require(std::isfinite(s) && s > 0.0f, "quantization scale must be positive and finite");
  }
  require(!symmetric || zero_point == 0, "symmetric quantization requires zero_point == 0");
  require(zero_point >= qmin() && zero_point <= qmax(), "zero_point outside integer range");
}

QuantParams symmetric_params(std::span<const float> channel_absmax, int bits) {
  QuantParams qp;
  qp.bits = bits;
  qp.symmetric = true;
  qp.zero_point = 0;
  qp.scale.resize(channel_absmax.size());
  const float qmax = static_cast<float>(qp.qmax());
  for (std::size_t c = 0; c < channel_absmax.size(); ++c) {
    qp.scale[c] = std::max(channel_absmax[c] / qmax, kScaleFloor);
  }
  qp.observed_min.resize(channel_absmax.size());
  qp.observed_max.assign(channel_absmax.begin(), channel_absmax.end());
  for (std::size_t c = 0; c < channel_absmax.size(); ++c) qp.observed_min[c] = -channel_absmax[c];
  return qp;
}

QuantParams asymmetric_params(float lo, float hi, int bits) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "invalid observed range");
  QuantParams qp;
  qp.bits = bits;
  qp.symmetric = false;
  qp.observed_min = {lo};
  qp.observed_max = {hi};
  lo = std::min(lo, 0.0f);
  hi = std::max(hi, 0.0f);
  if (hi - lo <= 0.0f) {
    qp.scale = {kScaleFloor};
    qp.zero_point = 0;
    return qp;
  }
  const double span = static_cast<double>(qp.qmax()) - qp.qmin();
  const float scale = std::max(static_cast<float>((static_cast<double>(hi) - lo) / span),
                               kScaleFloor);
  qp.scale = {scale};
  const double zp = round_half_even(qp.qmin() - static_cast<double>(lo) / scale);
  qp.zero_point = static_cast<std::int32_t>(
      std::clamp(zp, static_cast<double>(qp.qmin()), static_cast<double>(qp.qmax())));
  return qp;
}

float fake_quant(float x, float scale, std::int32_t zero_point, std::int32_t qmin,
                 std::int32_t qmax) noexcept {
  return dequantize_value(quantize_value(x, scale, zero_point, qmin, qmax), scale,
                          zero_point);
}

void fake_quant_inplace(std::span<float> x, const QuantParams& qp) {
  qp.validate();
  const std::int32_t lo = qp.qmin(), hi = qp.qmax();
  if (qp.channels() == 1) {
    for (float& v : x) v = fake_quant(v, qp.scale[0], qp.zero_point, lo, hi);
    return;
  }
  require(x.size() % qp.channels() == 0, "per-channel fake_quant: size not divisible by channels");
  const std::size_t per = x.size() / qp.channels();
  for (std::size_t c = 0; c < qp.channels(); ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      float& v = x[c * per + i];
      v = fake_quant(v, qp.scale[c], qp.zero_point, lo, hi);
    }
  }
}

Tensor fake_quant(const Tensor& x, const QuantParams& qp) {
  Tensor y = x;
  fake_quant_inplace(y.data(), qp);
  return y;
}

void RangeObserver::observe(std::span<const float> values) {
  const std::size_t channels = min_.size();
  require(channels >= 1 && values.size() % channels == 0,
          "observed tensor size not divisible by channel count");
  const std::size_t per = values.size() / channels;
  for (std::size_t c = 0; c < channels; ++c) {
    float lo = count_ ? min_[c] : std::numeric_limits<float>::infinity();
    float hi = count_ ? max_[c] : -std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < per; ++i) {
      const float v = values[c * per + i];
      if (!std::isfinite(v)) raise(ErrorKind::kNumeric, "non-finite value during calibration");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    min_[c] = lo;
    max_[c] = hi;
  }
  ++count_;
}

void apply_assignment(std::span<float> x, const Assignment& a) {
  switch (a.precision) {
    case Precision::kF32:
      return;
    case Precision::kBF16:
      bf16_round_inplace(x);
      return;
    case Precision::kInt8:
    case Precision::kInt16:
      require(a.qp.has_value(), "integer assignment without quantization parameters");
      fake_quant_inplace(x, *a.qp);
      return;
  }
}

// ---------------------------------------------------------------------------

QuantizedMatrix quantize_weights(std::span<const float> weights, std::size_t rows,
                                 std::size_t cols, const QuantParams& qp) {
  qp.validate();
  require(weights.size() == rows * cols, "weight matrix size mismatch");
  require(qp.bits == 8, "weights are stored as int8");
  require(qp.channels() == 1 || qp.channels() == rows,
          "per-channel weight scales must match the output channel count");
  QuantizedMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.resize(rows * cols);
  m.scale.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const float s = qp.channel_scale(r);
    m.scale[r] = s;
    for (std::size_t c = 0; c < cols; ++c) {
      m.values[r * cols + c] = static_cast<std::int8_t>(
          quantize_value(weights[r * cols + c], s, qp.zero_point, qp.qmin(), qp.qmax()));
    }
  }
  return m;
}

std::vector<std::int32_t> quantize_bias(std::span<const float> bias, float input_scale,
                                        const QuantizedMatrix& weights) {
  std::vector<std::int32_t> q(weights.rows, 0);
  if (bias.empty()) return q;
  require(bias.size() == weights.rows, "bias length must equal weight rows");
  constexpr double lim = std::numeric_limits<std::int32_t>::max();
  for (std::size_t r = 0; r < weights.rows; ++r) {
    const double grid = static_cast<double>(input_scale) * weights.scale[r];
    const double v = round_half_even(static_cast<double>(bias[r]) / grid);
    q[r] = static_cast<std::int32_t>(std::clamp(v, -lim, lim));
  }
  return q;
}

template <typename Q>
BasicTensor<Q> quantize_tensor(const Tensor& x, const QuantParams& qp) {
  qp.validate();
  require(qp.channels() == 1, "activation tensors are quantized per tensor");
  require(std::numeric_limits<Q>::max() >= qp.qmax(), "integer type too narrow for bit width");
  BasicTensor<Q> q(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    q[i] = static_cast<Q>(quantize_value(x[i], qp.scale[0], qp.zero_point, qp.qmin(), qp.qmax()));
  }
  return q;
}

template <typename Q>
Tensor dequantize_tensor(const BasicTensor<Q>& q, const QuantParams& qp) {
  Tensor x(q.shape());
  if (qp.channels() == 1) {
    for (std::size_t i = 0; i < q.size(); ++i)
      x[i] = dequantize_value(q[i], qp.scale[0], qp.zero_point);
    return x;
  }
  const std::size_t per = q.size() / qp.channels();
  for (std::size_t i = 0; i < q.size(); ++i)
    x[i] = dequantize_value(q[i], qp.scale[i / per], qp.zero_point);
  return x;
}

template BasicTensor<std::int8_t> quantize_tensor(const Tensor&, const QuantParams&);
template BasicTensor<std::int16_t> quantize_tensor(const Tensor&, const QuantParams&);
template Tensor dequantize_tensor(const BasicTensor<std::int8_t>&, const QuantParams&);
template Tensor dequantize_tensor(const BasicTensor<std::int16_t>&, const QuantParams&);

namespace {

template <typename In, typename Acc>
void int_gemm_impl(std::span<const In> q_in, std::int32_t zp_in, std::size_t columns,
                   const QuantizedMatrix& w, std::span<const std::int32_t> bias,
                   std::span<Acc> acc) {
  require(q_in.size() == w.cols * columns, "integer gemm input size mismatch");
  require(acc.size() == w.rows * columns, "integer gemm output size mismatch");
  require(bias.empty() || bias.size() == w.rows, "integer gemm bias size mismatch");
  // Centered input as Acc-width integers, computed once per call.
  std::vector<Acc> centered(q_in.size());
  for (std::size_t i = 0; i < q_in.size(); ++i)
    centered[i] = static_cast<Acc>(q_in[i]) - static_cast<Acc>(zp_in);
  for (std::size_t o = 0; o < w.rows; ++o) {
    Acc* __restrict dst = acc.data() + o * columns;
    const Acc b = bias.empty() ? Acc{0} : static_cast<Acc>(bias[o]);
    for (std::size_t n = 0; n < columns; ++n) dst[n] = b;
    const std::int8_t* wr = w.values.data() + o * w.cols;
    for (std::size_t i = 0; i < w.cols; ++i) {
      const Acc wi = wr[i];
      if (wi == 0) continue;
      const Acc* __restrict src = centered.data() + i * columns;
      for (std::size_t n = 0; n < columns; ++n) dst[n] += wi * src[n];
    }
  }
}

}  // namespace

void int_gemm(std::span<const std::int8_t> q_in, std::int32_t zp_in, std::size_t columns,
              const QuantizedMatrix& w, std::span<const std::int32_t> bias,
              std::span<std::int32_t> acc) {
  // |q - zp| <= 255 and |w| <= 127: the sum stays far inside int32 for
  // K <= 512 plus any int32 bias that does not itself saturate.
  require(w.cols <= 4096, "int8 gemm reduction length exceeds accumulator headroom");
  int_gemm_impl<std::int8_t, std::int32_t>(q_in, zp_in, columns, w, bias, acc);
}

void int_gemm(std::span<const std::int16_t> q_in, std::int32_t zp_in, std::size_t columns,
              const QuantizedMatrix& w, std::span<const std::int32_t> bias,
              std::span<std::int64_t> acc) {
  int_gemm_impl<std::int16_t, std::int64_t>(q_in, zp_in, columns, w, bias, acc);
}

TensorI8 int8_conv1d_k1(const TensorI8& q_input, const QuantParams& in_qp,
                        const TensorI8& q_weights, const QuantParams& weight_qp,
                        const TensorI32& bias, const QuantParams& out_qp) {
  in_qp.validate();
  weight_qp.validate();
  out_qp.validate();
  require(in_qp.bits == 8 && out_qp.bits == 8 && weight_qp.bits == 8,
          "int8_conv1d_k1 requires 8-bit parameters");
  require(q_input.rank() == 2 && q_weights.rank() == 2 && q_weights.dim(1) == q_input.dim(0),
          "int8_conv1d_k1 channel mismatch");
  require(weight_qp.symmetric, "weights must be symmetric");
  const std::size_t rows = q_weights.dim(0), columns = q_input.dim(1);
  require(bias.empty() || bias.shape() == Shape({rows}), "int8_conv1d_k1 bias must be [C_out]");
  require(weight_qp.channels() == 1 || weight_qp.channels() == rows,
          "weight scales must be per tensor or per output channel");
  require(q_input.dim(0) <= 512, "int8_conv1d_k1 supports up to 512 input channels");

  QuantizedMatrix w;
  w.rows = rows;
  w.cols = q_weights.dim(1);
  w.values = q_weights.storage();
  w.scale.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) w.scale[r] = weight_qp.channel_scale(r);

  std::vector<std::int32_t> acc(rows * columns);
  int_gemm(q_input.data(), in_qp.zero_point, columns, w, bias.data(), acc);

  TensorI8 out({rows, columns});
  for (std::size_t o = 0; o < rows; ++o) {
    const double multiplier = static_cast<double>(in_qp.scale[0]) * w.scale[o] /
                              static_cast<double>(out_qp.scale[0]);
    for (std::size_t n = 0; n < columns; ++n) {
      out[o * columns + n] = static_cast<std::int8_t>(requantize(
          acc[o * columns + n], multiplier, out_qp.zero_point, out_qp.qmin(), out_qp.qmax()));
    }
  }
  return out;
}

}  // namespace tfmlp
