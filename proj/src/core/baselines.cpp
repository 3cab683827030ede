// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/init.hpp"
#include "core/signals.hpp"

namespace tfmlp {

namespace {

void fill_uniform(Tensor& t, Rng& rng, double bound) {
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
}

LstmParams random_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.wx = Tensor({4 * hidden, in});
  p.wh = Tensor({4 * hidden, hidden});
  p.bias = Tensor({4 * hidden});
  fill_uniform(p.wx, rng, bound);
  fill_uniform(p.wh, rng, bound);
  fill_uniform(p.bias, rng, bound);
  return p;
}

// One textbook cell step for a single bin.
void cell_step(const LstmParams& p, std::size_t in, std::size_t hidden, const float* x, float* h,
               float* c, std::vector<float>& z) {
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    float acc = p.bias[r];
    const float* wx = p.wx.ptr() + r * in;
    const float* wh = p.wh.ptr() + r * hidden;
    for (std::size_t i = 0; i < in; ++i) acc += wx[i] * x[i];
    for (std::size_t j = 0; j < hidden; ++j) acc += wh[j] * h[j];
    z[r] = acc;
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const float i_gate = sigmoid(z[j]);
    const float f_gate = sigmoid(z[hidden + j]);
    const float cand = std::tanh(z[2 * hidden + j]);
    const float o_gate = sigmoid(z[3 * hidden + j]);
    c[j] = f_gate * c[j] + i_gate * cand;
    h[j] = o_gate * std::tanh(c[j]);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

}  // namespace

BiLstmParams init_bilstm(std::size_t channels, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  BiLstmParams p;
  p.forward = random_lstm(channels, hidden, rng);
  p.backward = random_lstm(channels, hidden, rng);
  p.proj = {Tensor({channels, 2 * hidden}), Tensor({channels})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(2 * hidden));
  fill_uniform(p.proj.weight, rng, bound);
  fill_uniform(p.proj.bias, rng, bound);
  return p;
}

std::size_t bilstm_param_count(std::size_t channels, std::size_t hidden) {
  const std::size_t direction = 4 * hidden * (channels + hidden) + 4 * hidden;
  return 2 * direction + channels * 2 * hidden + channels;
}

std::size_t bilstm_hidden_for_budget(std::size_t channels, std::size_t budget) {
  std::size_t best = 1;
  for (std::size_t h = 1; bilstm_param_count(channels, h) <= 2 * budget; ++h) {
    const auto diff = [&](std::size_t k) {
      const auto n = static_cast<long long>(bilstm_param_count(channels, k));
      return std::llabs(n - static_cast<long long>(budget));
    };
    if (diff(h) < diff(best)) best = h;
  }
  return best;
}

Tensor bilstm_frequency_stage(const Tensor& x, const BiLstmParams& params) {
  require(x.rank() == 2, "BiLSTM stage input must be [C x F]");
  const std::size_t C = x.dim(0), F = x.dim(1), H = params.forward.wh.dim(1);
  require(params.forward.wx.dim(1) == C, "BiLSTM input channel mismatch");
  // Bins become the sequence axis: gather [F x C].
  std::vector<float> seq(F * C);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t f = 0; f < F; ++f) seq[f * C + c] = x[c * F + f];

  std::vector<float> hidden(F * 2 * H);
  std::vector<float> z(4 * H), h(H), cell(H);
  std::fill(h.begin(), h.end(), 0.0f);
  std::fill(cell.begin(), cell.end(), 0.0f);
  for (std::size_t f = 0; f < F; ++f) {
    cell_step(params.forward, C, H, seq.data() + f * C, h.data(), cell.data(), z);
    std::copy(h.begin(), h.end(), hidden.begin() + f * 2 * H);
  }
  std::fill(h.begin(), h.end(), 0.0f);
  std::fill(cell.begin(), cell.end(), 0.0f);
  for (std::size_t k = F; k-- > 0;) {
    cell_step(params.backward, C, H, seq.data() + k * C, h.data(), cell.data(), z);
    std::copy(h.begin(), h.end(), hidden.begin() + k * 2 * H + H);
  }

  Tensor out = x;
  for (std::size_t f = 0; f < F; ++f) {
    const float* hf = hidden.data() + f * 2 * H;
    for (std::size_t c = 0; c < C; ++c) {
      float acc = params.proj.bias[c];
      const float* w = params.proj.weight.ptr() + c * 2 * H;
      for (std::size_t j = 0; j < 2 * H; ++j) acc += w[j] * hf[j];
      out[c * F + f] += acc;
    }
  }
  return out;
}

Tensor sequential_lstm_layer(const Tensor& x, const LstmParams& params, LstmState& state) {
  const std::size_t C = x.dim(0), F = x.dim(1), H = params.wh.dim(1);
  const std::size_t in = params.wx.dim(1);
  require(C == in && params.proj.weight.dim(0) == C, "sequential LSTM layer channel mismatch");
  Tensor out({C, F});
  std::vector<float> xb(C), h(H), c(H), z(4 * H);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t i = 0; i < C; ++i) xb[i] = x[i * F + f];
    for (std::size_t j = 0; j < H; ++j) {
      h[j] = state.h[j * F + f];
      c[j] = state.c[j * F + f];
    }
    for (std::size_t r = 0; r < 4 * H; ++r) {
      float acc = params.bias[r];
      for (std::size_t i = 0; i < C; ++i) acc += params.wx[r * C + i] * xb[i];
      for (std::size_t j = 0; j < H; ++j) acc += params.wh[r * H + j] * h[j];
      z[r] = acc;
    }
    for (std::size_t j = 0; j < H; ++j) {
      const float i_gate = 1.0f / (1.0f + std::exp(-z[j]));
      const float f_gate = 1.0f / (1.0f + std::exp(-z[H + j]));
      const float cand = std::tanh(z[2 * H + j]);
      const float o_gate = 1.0f / (1.0f + std::exp(-z[3 * H + j]));
      c[j] = f_gate * c[j] + i_gate * cand;
      h[j] = o_gate * std::tanh(c[j]);
      state.h[j * F + f] = h[j];
      state.c[j * F + f] = c[j];
    }
    for (std::size_t o = 0; o < C; ++o) {
      float acc = params.proj.bias[o];
      const float* w = params.proj.weight.ptr() + o * H;
      for (std::size_t j = 0; j < H; ++j) acc += w[j] * h[j];
      out[o * F + f] = xb[o] + acc;
    }
  }
  return out;
}

nlohmann::json RuntimeComparison::to_json() const {
  return {{"chunks", chunks},
          {"mixer_params", mixer_params},
          {"bilstm_params", bilstm_params},
          {"bilstm_hidden", bilstm_hidden},
          {"mixer_ms", mixer_ms},
          {"bilstm_ms", bilstm_ms},
          {"mixer_speedup", mixer_speedup()},
          {"conv_lstm_ms", conv_lstm_ms},
          {"reference_lstm_ms", reference_lstm_ms},
          {"lstm_speedup", lstm_speedup()}};
}

RuntimeComparison compare_runtime(const ModelConfig& cfg, std::size_t chunks, std::uint64_t seed) {
  require(chunks >= 1, "runtime comparison needs at least one chunk");
  ModelConfig one = cfg;
  one.blocks = 1;
  InitOptions init;
  init.seed = seed;
  const ModelParams params = init_random(one, init);
  const BlockParams& block = params.blocks.front();
  const std::size_t C = one.channels, F = one.block_bins();

  std::vector<MixerLayers> mixers;
  std::size_t mixer_params = 0;
  for (std::size_t m = 0; m < block.mixers.size(); ++m) {
    mixers.push_back(mixer_layers(block.mixers[m], "mix" + std::to_string(m + 1)));
    for (const DenseParams* d : {&block.mixers[m].tok_fc1, &block.mixers[m].tok_fc2,
                                 &block.mixers[m].ch_fc1, &block.mixers[m].ch_fc2}) {
      mixer_params += d->weight.size() + d->bias.size();
    }
  }
  const LstmLayers lstm = lstm_layers(block.lstm, "lstm");
  const std::size_t bh = bilstm_hidden_for_budget(C, mixer_params);
  const BiLstmParams bilstm = init_bilstm(C, bh, seed + 1);

  RuntimeComparison out;
  out.chunks = chunks;
  out.mixer_params = mixer_params;
  out.bilstm_hidden = bh;
  out.bilstm_params = bilstm_param_count(C, bh);

  Rng rng(seed + 2);
  Tensor frame({C, F});
  std::vector<double> mixer_t, bilstm_t, conv_t, ref_t;
  LstmState conv_state = LstmState::zeros(one.hidden, F);
  LstmState ref_state = conv_state;
  const ForwardHooks none;
  float sink = 0.0f;
  for (std::size_t n = 0; n < chunks; ++n) {
    for (float& v : frame.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    const Tensor seq = frame.reshaped({C, F, 1});
    mixer_t.push_back(time_ms([&] { sink += run_mixers(mixers, seq, none)[0]; }));
    bilstm_t.push_back(time_ms([&] { sink += bilstm_frequency_stage(frame, bilstm)[0]; }));
    conv_t.push_back(time_ms([&] { sink += run_lstm_step(lstm, frame, conv_state, none)[0]; }));
    ref_t.push_back(
        time_ms([&] { sink += sequential_lstm_layer(frame, block.lstm, ref_state)[0]; }));
  }
  require(std::isfinite(sink), "runtime comparison produced non-finite values");
  out.mixer_ms = median(mixer_t);
  out.bilstm_ms = median(bilstm_t);
  out.conv_lstm_ms = median(conv_t);
  out.reference_lstm_ms = median(ref_t);
  return out;
}

}  // namespace tfmlp
