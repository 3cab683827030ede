// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/layers.hpp"

#include <algorithm>
#include <cmath>

namespace tfmlp {

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::kStft: return "stft";
    case Stage::kEncoder: return "encoder";
    case Stage::kFilm: return "film";
    case Stage::kCompress: return "compress";
    case Stage::kMixer: return "mixer";
    case Stage::kLstm: return "lstm";
    case Stage::kDecompress: return "decompress";
    case Stage::kDecoder: return "decoder";
    case Stage::kIstft: return "istft";
  }
  return "?";
}

StageScope::StageScope(const ForwardHooks& hooks, Stage stage) noexcept
    : times_(hooks.times), stage_(stage) {
  if (times_) start_ = std::chrono::steady_clock::now();
}

StageScope::~StageScope() {
  if (!times_) return;
  const auto end = std::chrono::steady_clock::now();
  (*times_)[stage_] += std::chrono::duration<double>(end - start_).count();
}

void apply_edge(const Edge& edge, std::span<float> values, const ForwardHooks& hooks) {
  if (hooks.observe) hooks.observe(edge.name, values);
  apply_assignment(values, edge.assign);
}

AffineLayer make_affine(std::string name, std::vector<float> weight, std::size_t rows,
                        std::size_t cols, std::vector<float> bias, bool relu,
                        std::vector<std::size_t> row_channel) {
  require(weight.size() == rows * cols, name + ": weight size mismatch");
  require(bias.empty() || bias.size() == rows, name + ": bias size mismatch");
  AffineLayer layer;
  layer.in.name = name + ".in";
  layer.out.name = name + ".out";
  layer.name = std::move(name);
  layer.rows = rows;
  layer.cols = cols;
  layer.weight = std::move(weight);
  layer.bias = std::move(bias);
  layer.relu = relu;
  if (row_channel.empty()) {
    row_channel.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) row_channel[r] = r;
  }
  require(row_channel.size() == rows, layer.name + ": row channel map size mismatch");
  layer.channels = *std::max_element(row_channel.begin(), row_channel.end()) + 1;
  layer.row_channel = std::move(row_channel);
  return layer;
}

std::vector<float> weight_channel_absmax(const AffineLayer& layer) {
  std::vector<float> absmax(layer.channels, 0.0f);
  for (std::size_t r = 0; r < layer.rows; ++r) {
    float& m = absmax[layer.row_channel[r]];
    for (std::size_t c = 0; c < layer.cols; ++c) {
      m = std::max(m, std::fabs(layer.weight[r * layer.cols + c]));
    }
  }
  return absmax;
}

void assign_precision(AffineLayer& layer, const PrecisionPlan& plan) {
  const Assignment& w = plan.at(layer.name + ".weight");
  layer.in.assign = plan.at(layer.in.name);
  layer.out.assign = plan.at(layer.out.name);
  layer.weight_precision = w.precision;
  layer.qweight = {};
  layer.qbias.clear();

  for (const Assignment* a : {&layer.in.assign, &layer.out.assign}) {
    if (is_integer(a->precision)) {
      require(a->qp.has_value(), layer.name + ": integer activation has no calibration "
                                              "parameters; run calibration first");
      require(a->qp->channels() == 1 && a->qp->bits == precision_bits(a->precision),
              layer.name + ": activation parameters must be per tensor with matching bits");
    }
  }

  switch (w.precision) {
    case Precision::kF32:
      break;
    case Precision::kBF16:
      bf16_round_inplace(layer.weight);
      bf16_round_inplace(layer.bias);
      break;
    case Precision::kInt8: {
      require(w.qp.has_value(), layer.name + ".weight: int8 weights have no scales; run "
                                             "calibration first");
      require(w.qp->bits == 8 && w.qp->symmetric && w.qp->zero_point == 0,
              layer.name + ".weight: weights must be symmetric 8-bit");
      require(w.qp->channels() == layer.channels,
              layer.name + ".weight: expected " + std::to_string(layer.channels) +
                  " per-channel scales, got " + std::to_string(w.qp->channels()));
      require(is_integer(layer.in.assign.precision),
              layer.name + ": integer weights need an integer input assignment");
      QuantParams rows_qp = *w.qp;
      rows_qp.observed_min.clear();
      rows_qp.observed_max.clear();
      rows_qp.scale.resize(layer.rows);
      for (std::size_t r = 0; r < layer.rows; ++r) {
        rows_qp.scale[r] = w.qp->scale[layer.row_channel[r]];
      }
      layer.qweight = quantize_weights(layer.weight, layer.rows, layer.cols, rows_qp);
      layer.qbias = quantize_bias(layer.bias, layer.in.assign.qp->scale[0], layer.qweight);
      // Keep the float copy consistent with what the integer kernel computes.
      for (std::size_t i = 0; i < layer.weight.size(); ++i) {
        layer.weight[i] = static_cast<float>(layer.qweight.values[i]) *
                          layer.qweight.scale[i / layer.cols];
      }
      break;
    }
    case Precision::kInt16:
      raise(ErrorKind::kConfig, layer.name + ".weight: weights support f32, bf16 or int8");
  }
}

namespace {

template <typename Q, typename Acc>
void integer_affine(const AffineLayer& layer, std::span<const float> input, std::size_t columns,
                    Tensor& out, bool& out_quantized) {
  const QuantParams& iq = *layer.in.assign.qp;
  std::vector<Q> q(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    q[i] = static_cast<Q>(quantize_value(input[i], iq.scale[0], iq.zero_point, iq.qmin(),
                                         iq.qmax()));
  }
  std::vector<Acc> acc(layer.rows * columns);
  int_gemm(std::span<const Q>(q), iq.zero_point, columns, layer.qweight, layer.qbias,
           std::span<Acc>(acc));

  const Assignment& oa = layer.out.assign;
  out_quantized = is_integer(oa.precision);
  for (std::size_t r = 0; r < layer.rows; ++r) {
    const double grid = static_cast<double>(iq.scale[0]) * layer.qweight.scale[r];
    Acc* a = acc.data() + r * columns;
    float* dst = out.ptr() + r * columns;
    if (layer.relu) {
      for (std::size_t n = 0; n < columns; ++n) a[n] = std::max<Acc>(a[n], 0);
    }
    if (out_quantized) {
      const QuantParams& oq = *oa.qp;
      const double multiplier = grid / static_cast<double>(oq.scale[0]);
      for (std::size_t n = 0; n < columns; ++n) {
        const std::int32_t v = requantize(a[n], multiplier, oq.zero_point, oq.qmin(), oq.qmax());
        dst[n] = dequantize_value(v, oq.scale[0], oq.zero_point);
      }
    } else {
      for (std::size_t n = 0; n < columns; ++n) {
        dst[n] = static_cast<float>(static_cast<double>(a[n]) * grid);
      }
    }
  }
}

}  // namespace

Tensor run_affine(const AffineLayer& layer, std::span<const float> input, std::size_t columns,
                  const ForwardHooks& hooks) {
  require(columns >= 1 && input.size() == layer.cols * columns,
          layer.name + ": expected input of " + std::to_string(layer.cols) + " x " +
              std::to_string(columns) + " values, got " + std::to_string(input.size()));
  if (hooks.observe) hooks.observe(layer.in.name, input);
  Tensor out({layer.rows, columns});
  bool out_quantized = false;

  if (is_integer(layer.weight_precision)) {
    if (layer.in.assign.precision == Precision::kInt8) {
      integer_affine<std::int8_t, std::int32_t>(layer, input, columns, out, out_quantized);
    } else {
      integer_affine<std::int16_t, std::int64_t>(layer, input, columns, out, out_quantized);
    }
  } else {
    std::span<const float> src = input;
    std::vector<float> rounded;
    if (layer.in.assign.precision != Precision::kF32) {
      rounded.assign(input.begin(), input.end());
      apply_assignment(rounded, layer.in.assign);
      src = rounded;
    }
    conv1d_k1_into(src, layer.cols, columns, layer.weight, layer.rows, layer.bias, out.data());
    if (layer.relu) {
      for (float& v : out.data()) v = relu(v);
    }
  }

  if (hooks.observe) hooks.observe(layer.out.name, out.data());
  if (!out_quantized) apply_assignment(out.data(), layer.out.assign);
  return out;
}

LstmState LstmState::zeros(std::size_t hidden, std::size_t bins) {
  return LstmState{Tensor({hidden, bins}), Tensor({hidden, bins})};
}

Tensor run_mixers(std::span<const MixerLayers> reps, const Tensor& x, const ForwardHooks& hooks) {
  require(x.rank() == 3, "mixer input must be [C x F x T]");
  const std::size_t C = x.dim(0), F = x.dim(1), T = x.dim(2);
  Tensor cur = x;
  for (const MixerLayers& rep : reps) {
    require(rep.tok_fc1.cols == F && rep.ch_fc1.cols == C,
            "mixer input " + shape_string(x.shape()) + " does not match " + rep.tok_fc1.name);
    // Token mixing: one MLP over frequency, shared by all channels and frames.
    const Tensor by_bin = swap_leading_axes(cur);
    const Tensor h = run_affine(rep.tok_fc1, by_bin.data(), C * T, hooks);
    Tensor y = run_affine(rep.tok_fc2, h.data(), C * T, hooks);
    y.reshape({F, C, T});
    const Tensor mixed = swap_leading_axes(y);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += mixed[i];
    apply_edge(rep.tok_res, cur.data(), hooks);

    // Channel mixing: one MLP over channels, shared by all bins and frames.
    const Tensor hc = run_affine(rep.ch_fc1, cur.data(), F * T, hooks);
    const Tensor yc = run_affine(rep.ch_fc2, hc.data(), F * T, hooks);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += yc[i];
    apply_edge(rep.ch_res, cur.data(), hooks);
  }
  return cur;
}

Tensor run_lstm_step(const LstmLayers& lstm, const Tensor& x, LstmState& state,
                     const ForwardHooks& hooks) {
  const std::size_t H = lstm.hidden;
  require(x.rank() == 2 && x.dim(0) == lstm.wx.cols, "LSTM input must be [C x F']");
  const std::size_t F = x.dim(1);
  require(state.h.shape() == Shape({H, F}) && state.c.shape() == Shape({H, F}),
          "LSTM state must be [" + std::to_string(H) + " x " + std::to_string(F) + "]");

  Tensor gates = run_affine(lstm.wx, x.data(), F, hooks);
  const Tensor recurrent = run_affine(lstm.wh, state.h.data(), F, hooks);
  for (std::size_t i = 0; i < gates.size(); ++i) gates[i] += recurrent[i];
  apply_edge(lstm.gates, gates.data(), hooks);

  // Rows [0,H) input gate, [H,2H) forget, [2H,3H) candidate, [3H,4H) output.
  const std::size_t block = H * F;
  std::span<float> all = gates.data();
  activate_inplace(all.subspan(0, 2 * block), Activation::kSigmoid);
  activate_inplace(all.subspan(2 * block, block), Activation::kTanh);
  activate_inplace(all.subspan(3 * block, block), Activation::kSigmoid);
  apply_edge(lstm.act, all, hooks);
  const float* ig = all.data();
  const float* fg = ig + block;
  const float* gg = fg + block;
  const float* og = gg + block;

  Tensor kept({H, F}), added({H, F}), cell({H, F});
  for (std::size_t i = 0; i < block; ++i) kept[i] = fg[i] * state.c[i];
  apply_edge(lstm.cell, kept.data(), hooks);
  for (std::size_t i = 0; i < block; ++i) added[i] = ig[i] * gg[i];
  apply_edge(lstm.cell, added.data(), hooks);
  for (std::size_t i = 0; i < block; ++i) cell[i] = kept[i] + added[i];
  apply_edge(lstm.cell, cell.data(), hooks);

  Tensor squashed = activate(cell, Activation::kTanh);
  apply_edge(lstm.act, squashed.data(), hooks);
  Tensor hidden({H, F});
  for (std::size_t i = 0; i < block; ++i) hidden[i] = og[i] * squashed[i];
  apply_edge(lstm.hidden_state, hidden.data(), hooks);

  check_finite(cell.data(), lstm.cell.name + " (reset the stream)");
  check_finite(hidden.data(), lstm.hidden_state.name + " (reset the stream)");
  state.h = hidden;
  state.c = std::move(cell);

  Tensor out = run_affine(lstm.proj, hidden.data(), F, hooks);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
  apply_edge(lstm.res, out.data(), hooks);
  return out;
}

}  // namespace tfmlp
