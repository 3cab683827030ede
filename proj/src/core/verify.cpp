// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <iomanip>
#include <sstream>

#include "core/calibrate.hpp"
#include "core/container.hpp"
#include "core/engine.hpp"
#include "core/init.hpp"
#include "core/metrics.hpp"
#include "core/signals.hpp"

namespace tfmlp {

namespace {

std::string fmt(const char* label, double v) {
  std::ostringstream s;
  s << label << "=" << std::setprecision(3) << v;
  return s.str();
}

Tensor random_tensor(Shape shape, Rng& rng, double bound) {
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

SuiteResult lstm_oracle(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t C = 32, H = 32, F = 81;
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    LstmParams p;
    p.wx = random_tensor({4 * H, C}, rng, 0.3);
    p.wh = random_tensor({4 * H, H}, rng, 0.3);
    p.bias = random_tensor({4 * H}, rng, 0.3);
    p.proj = {random_tensor({C, H}, rng, 0.3), random_tensor({C}, rng, 0.3)};
    const Tensor x = random_tensor({C, F}, rng, 1.0);
    LstmState a{random_tensor({H, F}, rng, 1.0), random_tensor({H, F}, rng, 1.0)};
    LstmState b = a;
    conv_batched_lstm_step(x, p, a);
    reference_batched_lstm_step(x, p, b);
    for (std::size_t i = 0; i < H * F; ++i) {
      worst = std::max({worst, std::fabs(double(a.h[i]) - b.h[i]), std::fabs(double(a.c[i]) - b.c[i])});
    }
  }
  return {"lstm-oracle", worst < 1e-6, fmt("max|d|", worst)};
}

SuiteResult stft_roundtrip(std::uint64_t seed) {
  const FrameConfig cfg = FrameConfig::make();
  const std::vector<float> x = white_noise(cfg.sample_rate, seed, 0.3f);
  StftState state = StftState::make(cfg, 1);
  std::vector<float> y;
  for (std::size_t c = 0; c + cfg.hop_len <= x.size(); c += cfg.hop_len) {
    const Tensor frame = stft_step(std::span<const float>(x).subspan(c, cfg.hop_len), state, cfg);
    const Tensor out = istft_step(frame, state, cfg);
    y.insert(y.end(), out.data().begin(), out.data().end());
  }
  const std::size_t delay = cfg.reconstruction_delay();
  double err = 0.0, ref = 0.0;
  for (std::size_t n = cfg.win_len; n + delay < y.size() && n + cfg.win_len < x.size(); ++n) {
    const double d = double(y[n + delay]) - x[n];
    err += d * d;
    ref += double(x[n]) * x[n];
  }
  const double rel = std::sqrt(err / ref);
  return {"stft-roundtrip", rel < 1e-6, fmt("rel_rms", rel)};
}

SuiteResult streaming_offline(const Model& model, std::uint64_t seed) {
  const std::vector<float> x = speech_like(model.config().sample_rate / 2, seed);
  const Tensor offline = model.forward_offline(x);
  StreamState state = model.make_state();
  const std::size_t hop = model.config().hop_len, S = model.config().speakers;
  const std::size_t T = x.size() / hop;
  double worst = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const Tensor y = model.forward_chunk(std::span<const float>(x).subspan(t * hop, hop), state);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t n = 0; n < hop; ++n)
        worst = std::max(worst, std::fabs(double(y[s * hop + n]) - offline[s * T * hop + t * hop + n]));
  }
  return {"streaming-offline", worst < 1e-5, fmt("max|d|", worst)};
}

SuiteResult causality(const Model& model, std::uint64_t seed) {
  const std::size_t hop = model.config().hop_len, chunks = 50, k = 25;
  std::vector<float> x = speech_like(chunks * hop, seed);
  auto run = [&](const std::vector<float>& in) {
    StreamState state = model.make_state();
    std::vector<Tensor> out;
    for (std::size_t c = 0; c < chunks; ++c) {
      out.push_back(model.forward_chunk(std::span<const float>(in).subspan(c * hop, hop), state));
    }
    return out;
  };
  const auto base = run(x);
  for (std::size_t n = k * hop; n < (k + 1) * hop; ++n) x[n] += 0.25f;
  const auto moved = run(x);
  bool same_before = true;
  for (std::size_t c = 0; c < k; ++c) same_before = same_before && base[c] == moved[c];
  bool changed_after = false;
  for (std::size_t c = k; c < chunks; ++c) changed_after = changed_after || !(base[c] == moved[c]);
  return {"causality", same_before && changed_after,
          same_before ? (changed_after ? "earlier chunks bit-identical" : "perturbation had no effect")
                      : "earlier output changed"};
}

SuiteResult quant_lsb(std::uint64_t seed) {
  Rng rng(seed);
  std::int64_t worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.next() % 48, cols = 1 + rng.next() % 96,
                      n = 1 + rng.next() % 24;
    const Tensor x = random_tensor({cols, n}, rng, rng.uniform(0.1, 4.0));
    const Tensor w = random_tensor({rows, cols}, rng, rng.uniform(0.05, 1.0));
    const Tensor b = random_tensor({rows}, rng, 0.5);
    const auto [xlo, xhi] = std::minmax_element(x.data().begin(), x.data().end());
    const QuantParams in_qp = asymmetric_params(*xlo, *xhi, 8);
    std::vector<float> absmax(rows, 0.0f);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) absmax[r] = std::max(absmax[r], std::fabs(w[r * cols + c]));
    const QuantParams w_qp = symmetric_params(absmax, 8);
    const Tensor y = conv1d_k1(x, w, b);
    const auto [ylo, yhi] = std::minmax_element(y.data().begin(), y.data().end());
    const QuantParams out_qp = asymmetric_params(*ylo, *yhi, 8);

    const QuantizedMatrix qm = quantize_weights(w.data(), rows, cols, w_qp);
    const std::vector<std::int32_t> qb = quantize_bias(b.data(), in_qp.scale[0], qm);
    const TensorI8 qx = quantize_tensor<std::int8_t>(x, in_qp);
    const TensorI8 q = int8_conv1d_k1(qx, in_qp, TensorI8({rows, cols}, std::vector<std::int8_t>(qm.values)),
                                      w_qp, TensorI32({rows}, qb), out_qp);
    const Tensor xf = fake_quant(x, in_qp);
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = double(in_qp.scale[0]) * w_qp.scale[r];
      for (std::size_t j = 0; j < n; ++j) {
        double acc = qb[r] * s;
        for (std::size_t c = 0; c < cols; ++c) {
          acc += double(fake_quant(w[r * cols + c], w_qp.scale[r], 0, -128, 127)) * xf[c * n + j];
        }
        const std::int32_t sim = quantize_value(static_cast<float>(acc), out_qp.scale[0],
                                                out_qp.zero_point, -128, 127);
        worst = std::max<std::int64_t>(worst, std::llabs(std::int64_t(sim) - q[r * n + j]));
      }
    }
  }
  return {"quant-lsb", worst <= 1, "max LSB diff=" + std::to_string(worst)};
}

SuiteResult fake_quant_props(std::uint64_t seed) {
  Rng rng(seed);
  bool ok = true;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const float scale = static_cast<float>(std::exp(rng.uniform(-8.0, 2.0)));
    const std::int32_t zp = static_cast<std::int32_t>(rng.next() % 101) - 50;
    float prev_x = -1e30f, prev_y = -1e30f;
    std::vector<float> xs(64);
    for (float& v : xs) v = static_cast<float>(rng.uniform(-200.0, 200.0) * scale);
    std::sort(xs.begin(), xs.end());
    for (float x : xs) {
      const float y = fake_quant(x, scale, zp, -128, 127);
      ok = ok && fake_quant(y, scale, zp, -128, 127) == y;
      ok = ok && (x < prev_x || y >= prev_y);
      const double lo = (-128.0 - zp) * scale, hi = (127.0 - zp) * scale;
      if (x >= lo && x <= hi) ok = ok && std::fabs(double(x) - y) <= 0.5 * scale * (1 + 1e-6);
      const float ys = fake_quant(x, scale, 0, -128, 127);
      if (std::fabs(x) <= 127.0 * scale) ok = ok && fake_quant(-x, scale, 0, -128, 127) == -ys;
      prev_x = x;
      prev_y = y;
    }
  }
  return {"fake-quant", ok, ok ? "idempotent, monotone, bounded, odd" : "property violated"};
}

SuiteResult presets(const Model& model) {
  std::size_t unassigned = 0;
  for (const std::string& name : preset_names()) {
    unassigned += make_preset(name, model.config()).unassigned(model.config()).size();
  }
  const std::vector<float> x = speech_like(model.config().hop_len * 20, 7);
  const Model fp = apply_plan(model, make_preset("fp32", model.config()));
  const bool identical = fp.forward_offline(x) == model.forward_offline(x);
  return {"presets", unassigned == 0 && identical,
          std::to_string(preset_names().size()) + " presets, " + std::to_string(unassigned) +
              " unassigned, fp32 " + (identical ? "bit-identical" : "differs")};
}

SuiteResult metrics(std::uint64_t seed) {
  const std::vector<float> r = speech_like(4000, seed), e = white_noise(4000, seed + 1, 0.1f);
  std::vector<double> ref(r.begin(), r.end()), est(r.size()), scaled(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    est[i] = double(r[i]) + e[i];
    scaled[i] = -3.5 * est[i];
  }
  const double drift = std::fabs(si_sdr(std::span<const double>(ref), std::span<const double>(est)) -
                                 si_sdr(std::span<const double>(ref), std::span<const double>(scaled)));
  const std::vector<float> ref2 = {1.0f, 0.0f}, est2 = {1.0f, 1.0f};
  const double zero_case = si_sdr(ref2, est2);
  const std::vector<std::vector<float>> refs = {r, e};
  const std::vector<std::vector<float>> swapped = {e, r};
  const PitResult id = pit_score(refs, refs), sw = pit_score(refs, swapped);
  const bool ok = drift < 1e-9 && std::fabs(zero_case) < 1e-9 && sw.permutation[0] == 1 &&
                  id.permutation[0] == 0 && std::fabs(id.mean_db - sw.mean_db) < 1e-9;
  return {"si-sdr", ok, fmt("scale drift dB", drift)};
}

SuiteResult container_roundtrip(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.blocks = 2;
  InitOptions init;
  init.seed = seed;
  const Model model(cfg, init_random(cfg, init));
  const std::vector<std::vector<float>> calib = {speech_like(cfg.sample_rate / 4, seed)};
  const Model q = quantize_model(model, "mix-lstm-fpconv-mixmlp", calib);
  const Model back = deserialize_model(serialize_model(q));
  const std::vector<float> x = speech_like(cfg.hop_len * 30, seed + 3);
  const bool ok = back.forward_offline(x) == q.forward_offline(x);
  return {"container", ok, ok ? "bit-identical after reload" : "reloaded model differs"};
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "lstm-oracle", "stft-roundtrip", "streaming-offline", "causality", "quant-lsb",
      "fake-quant",  "presets",        "si-sdr",            "container"};
  return names;
}

std::vector<SuiteResult> run_verify(std::uint64_t seed, const SuiteCallback& on_result) {
  std::vector<SuiteResult> results;
  auto record = [&](auto&& suite, const std::string& name) {
    SuiteResult r;
    try {
      r = suite();
    } catch (const std::exception& e) {
      r = {name, false, e.what()};
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  };
  InitOptions init;
  init.seed = seed;
  const ModelConfig cfg;
  std::unique_ptr<Model> model;
  try {
    model = std::make_unique<Model>(cfg, init_random(cfg, init));
  } catch (const std::exception& e) {
    SuiteResult r{"model", false, e.what()};
    if (on_result) on_result(r);
    return {r};
  }
  record([&] { return lstm_oracle(seed); }, "lstm-oracle");
  record([&] { return stft_roundtrip(seed); }, "stft-roundtrip");
  record([&] { return streaming_offline(*model, seed); }, "streaming-offline");
  record([&] { return causality(*model, seed); }, "causality");
  record([&] { return quant_lsb(seed); }, "quant-lsb");
  record([&] { return fake_quant_props(seed); }, "fake-quant");
  record([&] { return presets(*model); }, "presets");
  record([&] { return metrics(seed); }, "si-sdr");
  record([&] { return container_roundtrip(seed); }, "container");
  return results;
}

}  // namespace tfmlp
