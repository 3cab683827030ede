// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Release acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/calibrate.hpp"
#include "core/container.hpp"
#include "core/dsp.hpp"
#include "core/init.hpp"
#include "core/layers.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/plan.hpp"
#include "core/quant.hpp"
#include "core/signals.hpp"
#include "core/wav.hpp"

namespace tfmlp {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

Tensor random_tensor(Shape shape, Rng& rng, double bound) {
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

Model make_model(const ModelConfig& cfg, std::uint64_t seed) {
  InitOptions o;
  o.seed = seed;
  return Model(cfg, init_random(cfg, o));
}

double max_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(double(a[i]) - b[i]));
  return worst;
}

// 1
Outcome lstm_equivalence() {
  Rng rng(101);
  const std::size_t C = 32, H = 32, F = 81;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    LstmParams p;
    p.wx = random_tensor({4 * H, C}, rng, 0.4);
    p.wh = random_tensor({4 * H, H}, rng, 0.4);
    p.bias = random_tensor({4 * H}, rng, 0.4);
    p.proj = {random_tensor({C, H}, rng, 0.4), random_tensor({C}, rng, 0.4)};
    const Tensor x = random_tensor({C, F}, rng, 1.5);
    LstmState a{random_tensor({H, F}, rng, 1.0), random_tensor({H, F}, rng, 2.0)};
    LstmState b = a;
    const Tensor y = conv_batched_lstm_step(x, p, a);
    const Tensor h = reference_batched_lstm_step(x, p, b);
    worst = std::max({worst, max_diff(a.h, h), max_diff(a.h, b.h), max_diff(a.c, b.c)});
    // Block output: residual plus the projected reference hidden state.
    for (std::size_t o = 0; o < C; ++o)
      for (std::size_t f = 0; f < F; ++f) {
        double acc = double(x[o * F + f]) + p.proj.bias[o];
        for (std::size_t j = 0; j < H; ++j) acc += double(p.proj.weight[o * H + j]) * h[j * F + f];
        worst = std::max(worst, std::fabs(acc - y[o * F + f]));
      }
  }
  return {worst < 1e-6, "100 draws, max|d| " + num(worst)};
}

// 2
Outcome stft_reconstruction() {
  const FrameConfig cfg = FrameConfig::make();
  const std::vector<float> x = white_noise(cfg.sample_rate, 202, 0.3f);
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
  return {rel < 1e-6, "relative rms " + num(rel)};
}

// 3
Outcome streaming_offline() {
  const Model model = make_model(ModelConfig{}, 303);
  const std::size_t hop = model.config().hop_len, S = model.config().speakers;
  const std::size_t T = (2 * model.config().sample_rate + hop - 1) / hop;
  std::vector<float> x = speech_like(2 * model.config().sample_rate, 303);
  x.resize(T * hop, 0.0f);
  const Tensor offline = model.forward_offline(x);
  StreamState state = model.make_state();
  double worst = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const Tensor y = model.forward_chunk(std::span<const float>(x).subspan(t * hop, hop), state);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t n = 0; n < hop; ++n)
        worst = std::max(worst, std::fabs(double(y[s * hop + n]) - offline[s * T * hop + t * hop + n]));
  }
  return {worst < 1e-5, std::to_string(T) + " chunks, max|d| " + num(worst)};
}

// 4
Outcome causality() {
  const Model model = make_model(ModelConfig{}, 404);
  const std::size_t hop = model.config().hop_len, chunks = 50;
  const std::vector<float> x = speech_like(chunks * hop, 404);
  auto run = [&](const std::vector<float>& in) {
    StreamState state = model.make_state();
    std::vector<Tensor> out;
    for (std::size_t c = 0; c < chunks; ++c)
      out.push_back(model.forward_chunk(std::span<const float>(in).subspan(c * hop, hop), state));
    return out;
  };
  const auto base = run(x);
  std::string detail;
  bool ok = true;
  for (std::size_t k : {5u, 25u, 49u}) {
    std::vector<float> moved_in = x;
    for (std::size_t n = k * hop; n < (k + 1) * hop; ++n) moved_in[n] += 0.25f;
    const auto moved = run(moved_in);
    bool before = true, after = false;
    for (std::size_t c = 0; c < k; ++c) before = before && base[c] == moved[c];
    for (std::size_t c = k; c < chunks; ++c) after = after || !(base[c] == moved[c]);
    ok = ok && before && after;
    detail += "k=" + std::to_string(k) + (before ? (after ? " ok" : " no effect") : " leaked") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 5
Outcome parameter_counts() {
  const double bss = double(param_count(ModelConfig::separation()));
  const double tse = double(param_count(ModelConfig::extraction()));
  const bool ok = std::fabs(bss / 493e3 - 1.0) <= 0.15 && std::fabs(tse / 509e3 - 1.0) <= 0.15;
  return {ok, "separation " + std::to_string(std::size_t(bss)) + ", extraction " +
                  std::to_string(std::size_t(tse))};
}

// 6
Outcome model_size() {
  const Model model = make_model(ModelConfig{}, 606);
  const std::vector<std::vector<float>> calib = {speech_like(16000, 61), speech_like(8000, 62)};
  const std::size_t bytes = serialize_model(quantize_model(model, "int8", calib)).size();
  const bool ok = bytes <= 600000 && bytes <= 1500000;
  return {ok, "int8 container " + std::to_string(bytes) + " bytes"};
}

// 7: standalone kernel and the network's integer layer path, each against a
// float simulation on the same quantization grids.
Outcome int8_lsb() {
  Rng rng(707);
  std::int64_t worst = 0;
  int layers = 0;
  for (int trial = 0; trial < 100; ++trial, ++layers) {
    const std::size_t rows = 1 + rng.next() % 48, cols = 1 + rng.next() % 96, n = 1 + rng.next() % 24;
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
    const TensorI8 q = int8_conv1d_k1(quantize_tensor<std::int8_t>(x, in_qp), in_qp,
                                      TensorI8({rows, cols}, std::vector<std::int8_t>(qm.values)), w_qp,
                                      TensorI32({rows}, quantize_bias(b.data(), in_qp.scale[0], qm)), out_qp);
    const Tensor xf = fake_quant(x, in_qp);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = b[r];
        for (std::size_t c = 0; c < cols; ++c)
          acc += double(fake_quant(w[r * cols + c], w_qp.scale[r], 0, -128, 127)) * xf[c * n + j];
        const std::int32_t sim =
            quantize_value(static_cast<float>(acc), out_qp.scale[0], out_qp.zero_point, -128, 127);
        worst = std::max<std::int64_t>(worst, std::llabs(std::int64_t(sim) - q[r * n + j]));
      }
    }
  }
  for (int trial = 0; trial < 100; ++trial, ++layers) {
    const std::size_t rows = 1 + rng.next() % 40, cols = 1 + rng.next() % 80, n = 1 + rng.next() % 20;
    const bool relu = trial % 2 == 1;
    const Tensor x = random_tensor({cols, n}, rng, rng.uniform(0.1, 3.0));
    const Tensor w = random_tensor({rows, cols}, rng, rng.uniform(0.05, 1.0));
    const Tensor b = random_tensor({rows}, rng, 0.3);
    AffineLayer layer = make_affine("layer", {w.data().begin(), w.data().end()}, rows, cols, {b.data().begin(), b.data().end()}, relu);
    const Tensor yf = conv1d_k1(x, w, b);
    const auto [xlo, xhi] = std::minmax_element(x.data().begin(), x.data().end());
    const auto [ylo, yhi] = std::minmax_element(yf.data().begin(), yf.data().end());
    PrecisionPlan plan;
    plan.entries["layer.weight"] = {Precision::kInt8, symmetric_params(weight_channel_absmax(layer), 8)};
    plan.entries["layer.in"] = {Precision::kInt8, asymmetric_params(*xlo, *xhi, 8)};
    plan.entries["layer.out"] = {Precision::kInt8,
                                 asymmetric_params(relu ? 0.0f : *ylo, std::max(*yhi, 0.0f), 8)};
    assign_precision(layer, plan);
    const Tensor got = run_affine(layer, x.data(), n, {});

    const QuantParams& iq = *plan.entries["layer.in"].qp;
    const QuantParams& wq = *plan.entries["layer.weight"].qp;
    const QuantParams& oq = *plan.entries["layer.out"].qp;
    const Tensor xf = fake_quant(x, iq);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = b[r];
        for (std::size_t c = 0; c < cols; ++c)
          acc += double(fake_quant(w[r * cols + c], wq.scale[r], 0, -128, 127)) * xf[c * n + j];
        if (relu) acc = std::max(acc, 0.0);
        const std::int32_t sim = quantize_value(static_cast<float>(acc), oq.scale[0], oq.zero_point, -128, 127);
        const std::int32_t kernel =
            quantize_value(got[r * n + j], oq.scale[0], oq.zero_point, -128, 127);
        worst = std::max<std::int64_t>(worst, std::llabs(std::int64_t(sim) - kernel));
      }
    }
  }
  return {worst <= 1, std::to_string(layers) + " layers, max " + std::to_string(worst) + " LSB"};
}

// 8
Outcome fake_quant_properties() {
  Rng rng(808);
  std::size_t idem = 0, mono = 0, bound = 0, odd = 0, checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const float scale = static_cast<float>(std::exp(rng.uniform(-10.0, 3.0)));
    const std::int32_t zp = static_cast<std::int32_t>(rng.next() % 201) - 100;
    std::vector<float> xs(128);
    for (float& v : xs) v = static_cast<float>(rng.uniform(-300.0, 300.0) * scale);
    std::sort(xs.begin(), xs.end());
    float prev = -INFINITY;
    for (float x : xs) {
      ++checked;
      const float y = fake_quant(x, scale, zp, -128, 127);
      idem += fake_quant(y, scale, zp, -128, 127) != y;
      mono += y < prev;
      prev = y;
      const double lo = (-128.0 - zp) * scale, hi = (127.0 - zp) * scale;
      if (x >= lo && x <= hi) bound += std::fabs(double(x) - y) > 0.5 * scale * (1 + 1e-6);
      if (std::fabs(x) <= 127.0 * scale)
        odd += fake_quant(-x, scale, 0, -128, 127) != -fake_quant(x, scale, 0, -128, 127);
    }
  }
  const std::size_t bad = idem + mono + bound + odd;
  return {bad == 0, std::to_string(checked) + " samples, violations idempotence " + std::to_string(idem) +
                        " monotonicity " + std::to_string(mono) + " bound " + std::to_string(bound) +
                        " symmetry " + std::to_string(odd)};
}

// 9
Outcome preset_completeness() {
  std::size_t unassigned = 0, presets = 0;
  for (const ModelConfig& cfg : {ModelConfig::separation(), ModelConfig::extraction()}) {
    for (const std::string& name : preset_names()) {
      unassigned += make_preset(name, cfg).unassigned(cfg).size();
      ++presets;
    }
  }
  bool identical = true;
  for (const ModelConfig& cfg : {ModelConfig::separation(), ModelConfig::extraction()}) {
    const Model model = make_model(cfg, 909);
    const Model fp = apply_plan(model, make_preset("fp32", cfg));
    const std::vector<float> x = speech_like(cfg.hop_len * 40, 909);
    const std::vector<float> e = cfg.film ? random_embedding(cfg.embed_dim, 9) : std::vector<float>{};
    identical = identical && fp.forward_offline(x, e) == model.forward_offline(x, e);
  }
  return {unassigned == 0 && preset_names().size() == 6 && identical,
          std::to_string(presets) + " plans, " + std::to_string(unassigned) + " unassigned, fp32 " +
              (identical ? "bit-identical" : "differs")};
}

// 10
Outcome si_sdr_metric() {
  const std::vector<float> r = speech_like(8000, 1010), n = white_noise(8000, 1011, 0.2f);
  std::vector<double> ref(r.begin(), r.end()), est(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) est[i] = double(r[i]) + n[i];
  const double base = si_sdr(ref, est);
  double drift = 0.0;
  for (double c : {-7.0, -0.5, 0.003, 2.0, 1e4}) {
    std::vector<double> scaled(est);
    for (double& v : scaled) v *= c;
    drift = std::max(drift, std::fabs(si_sdr(ref, scaled) - base));
  }
  const double zero_case = si_sdr(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0});
  std::vector<float> noisy(r);
  for (std::size_t i = 0; i < r.size(); ++i) noisy[i] += 0.3f * n[i];
  const std::vector<std::vector<float>> refs = {r, n}, ordered = {noisy, n}, swapped = {n, noisy};
  const PitResult a = pit_score(refs, ordered), b = pit_score(refs, swapped);
  const bool pit_ok = a.permutation[0] == 0 && b.permutation[0] == 1 && a.mean_db == b.mean_db;
  const bool ok = drift < 1e-9 && std::fabs(zero_case) < 1e-9 && pit_ok;
  return {ok, "scale drift " + num(drift) + " dB, [1,0]/[1,1] " + num(zero_case) + " dB, PIT " +
                  (pit_ok ? "symmetric" : "asymmetric")};
}

// 11
Outcome runtime_ordering() {
  const RuntimeComparison r = compare_runtime(ModelConfig{}, 1000, 1111);
  const bool ok = r.chunks >= 1000 && r.mixer_speedup() >= 2.0 && r.lstm_speedup() >= 2.0;
  return {ok, "mixer " + num(r.mixer_speedup()) + "x vs BiLSTM (" + std::to_string(r.mixer_params) + " vs " +
                  std::to_string(r.bilstm_params) + " params), conv LSTM " + num(r.lstm_speedup()) +
                  "x vs sequential, " + std::to_string(r.chunks) + " chunks"};
}

// 12
int shell(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(TFMLP_CLI_PATH) + " " + args + " 2>&1";
  std::FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  std::string text;
  while (std::fgets(buf, sizeof buf, p)) text += buf;
  const int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_smoke() {
  const fs::path dir = fs::temp_directory_path() / ("tfmlp_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir / "calib");
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};
  auto at = [&](const std::string& name) { return (dir / name).string(); };

  const std::size_t frames = 16000 + 37;
  write_wav(at("mix.wav"), speech_like(frames, 1212), 16000);
  write_wav(at("calib/a.wav"), speech_like(8000, 1213), 16000);
  write_wav(at("calib/b.wav"), speech_like(8000, 1214), 16000);
  {
    const std::vector<float> e = random_embedding(256, 1215);
    std::vector<std::uint8_t> bytes(e.size() * 4);
    std::memcpy(bytes.data(), e.data(), bytes.size());
    write_file(at("spk.bin"), bytes);
  }
  {
    const std::string tse = R"({"speakers": 1, "film": true})";
    write_file(at("tse.json"), std::vector<std::uint8_t>(tse.begin(), tse.end()));
  }

  std::string log;
  auto step = [&](const std::string& args) {
    std::string out;
    const int code = shell(args, &out);
    if (code != 0) log += "'" + args.substr(0, args.find(' ')) + "' exited " + std::to_string(code) + ": " + out;
    return code == 0;
  };
  auto frames_ok = [&](const std::string& path) {
    try {
      const AudioFile a = read_wav(path);
      if (a.channels == 1 && a.sample_rate == 16000 && a.frames() == frames) return true;
      log += path + ": wrong shape; ";
    } catch (const std::exception& e) {
      log += std::string(e.what()) + "; ";
    }
    return false;
  };

  bool ok = step("init-random --seed 12 --out " + at("bss.tfm")) &&
            step("init-random --seed 13 --config " + at("tse.json") + " --out " + at("tse.tfm"));
  std::size_t runs = 0;
  for (const std::string& preset : preset_names()) {
    if (!ok) break;
    const std::string qb = at("bss_" + preset + ".tfm"), qt = at("tse_" + preset + ".tfm");
    ok = step("quantize --model " + at("bss.tfm") + " --preset " + preset + " --calib " + at("calib") +
              " --out " + qb) &&
         step("separate --model " + qb + " --in " + at("mix.wav") + " --out-prefix " + at("est_")) &&
         frames_ok(at("est_1.wav")) && frames_ok(at("est_2.wav")) &&
         step("quantize --model " + at("tse.tfm") + " --preset " + preset + " --calib " + at("calib") +
              " --embedding " + at("spk.bin") + " --out " + qt) &&
         step("extract --model " + qt + " --in " + at("mix.wav") + " --embedding " + at("spk.bin") +
              " --out " + at("target.wav")) &&
         frames_ok(at("target.wav"));
    runs += ok ? 2 : 0;
  }
  const bool verified = ok && step("verify");
  return {ok && verified, ok ? std::to_string(runs) + " quantize/run pipelines, verify " +
                                   (verified ? "exit 0" : "failed: " + log)
                             : log};
}

}  // namespace
}  // namespace tfmlp

int main() {
  using tfmlp::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conv-batched LSTM equivalence", tfmlp::lstm_equivalence},
      {"STFT perfect reconstruction", tfmlp::stft_reconstruction},
      {"streaming equals offline", tfmlp::streaming_offline},
      {"causality", tfmlp::causality},
      {"parameter counts", tfmlp::parameter_counts},
      {"model size budget", tfmlp::model_size},
      {"int8 LSB fidelity", tfmlp::int8_lsb},
      {"fake_quant properties", tfmlp::fake_quant_properties},
      {"preset completeness", tfmlp::preset_completeness},
      {"SI-SDR metric", tfmlp::si_sdr_metric},
      {"runtime ordering", tfmlp::runtime_ordering},
      {"CLI end to end", tfmlp::cli_smoke},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " " << std::setw(2) << i + 1 << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
