// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "core/calibrate.hpp"
#include "core/error.hpp"
#include "core/init.hpp"
#include "core/layers.hpp"
#include "core/metrics.hpp"
#include "core/plan.hpp"
#include "core/quant.hpp"
#include "core/signals.hpp"
#include "test_util.hpp"

namespace tfmlp {
namespace {

using testing::random_tensor;

TEST(QuantParams, SymmetricUnitRange) {
  const std::vector<float> absmax{1.0f};
  const QuantParams qp = symmetric_params(absmax, 8);
  EXPECT_FLOAT_EQ(qp.scale[0], 1.0f / 127.0f);
  EXPECT_EQ(qp.zero_point, 0);
  EXPECT_TRUE(qp.symmetric);
}

TEST(QuantParams, AsymmetricPositiveRange) {
  const QuantParams qp = asymmetric_params(0.0f, 2.54f, 8);
  EXPECT_FLOAT_EQ(qp.scale[0], 2.54f / 255.0f);
  EXPECT_EQ(qp.zero_point, -128);
}

TEST(QuantParams, AsymmetricRangeIsWidenedToZero) {
  const QuantParams qp = asymmetric_params(1.0f, 3.0f, 8);
  EXPECT_FLOAT_EQ(qp.scale[0], 3.0f / 255.0f);
  EXPECT_EQ(qp.zero_point, -128);
  const QuantParams neg = asymmetric_params(-3.0f, -1.0f, 8);
  EXPECT_EQ(neg.zero_point, 127);
}

TEST(QuantParams, AllZeroRangeUsesScaleFloor) {
  const QuantParams a = asymmetric_params(0.0f, 0.0f, 8);
  EXPECT_EQ(a.scale[0], kScaleFloor);
  EXPECT_EQ(a.zero_point, 0);
  const std::vector<float> absmax{0.0f, 2.0f};
  const QuantParams s = symmetric_params(absmax, 8);
  EXPECT_EQ(s.scale[0], kScaleFloor);
  EXPECT_FLOAT_EQ(s.scale[1], 2.0f / 127.0f);
}

TEST(QuantParams, SixteenBit) {
  const QuantParams qp = asymmetric_params(-1.0f, 1.0f, 16);
  EXPECT_EQ(qp.qmin(), -32768);
  EXPECT_EQ(qp.qmax(), 32767);
  EXPECT_FLOAT_EQ(qp.scale[0], 2.0f / 65535.0f);
}

TEST(QuantParams, InvalidRangeRejected) {
  EXPECT_THROW(asymmetric_params(1.0f, -1.0f, 8), Error);
  EXPECT_THROW(asymmetric_params(NAN, 1.0f, 8), Error);
}

TEST(FakeQuant, Examples) {
  EXPECT_FLOAT_EQ(fake_quant(0.26f, 0.1f, 0, -128, 127), 0.3f);
  EXPECT_FLOAT_EQ(fake_quant(0.25f, 0.1f, 0, -128, 127), 0.2f);
  EXPECT_FLOAT_EQ(fake_quant(1000.0f * 0.1f, 0.1f, 0, -128, 127), 12.7f);
  EXPECT_FLOAT_EQ(fake_quant(-1000.0f * 0.1f, 0.1f, 0, -128, 127), -12.8f);
  EXPECT_FLOAT_EQ(fake_quant(0.0f, 0.05f, 17, -128, 127), 0.0f);
}

TEST(FakeQuant, IdempotentMonotoneBoundedOdd) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const float scale = static_cast<float>(std::exp(rng.uniform(-8.0, 2.0)));
    const std::int32_t zp = static_cast<std::int32_t>(rng.next() % 101) - 50;
    std::vector<float> xs(64);
    for (float& v : xs) v = static_cast<float>(rng.uniform(-200.0, 200.0) * scale);
    std::sort(xs.begin(), xs.end());
    float prev = -INFINITY;
    for (float x : xs) {
      const float y = fake_quant(x, scale, zp, -128, 127);
      ASSERT_EQ(fake_quant(y, scale, zp, -128, 127), y);
      ASSERT_GE(y, prev);
      prev = y;
      const double lo = (-128.0 - zp) * scale, hi = (127.0 - zp) * scale;
      if (x >= lo && x <= hi) {
        ASSERT_LE(std::fabs(double(x) - y), 0.5 * scale * (1 + 1e-6));
      }
      if (std::fabs(x) <= 127.0 * scale) {
        ASSERT_EQ(fake_quant(-x, scale, 0, -128, 127), -fake_quant(x, scale, 0, -128, 127));
      }
    }
  }
}

TEST(FakeQuant, TensorPerChannel) {
  QuantParams qp;
  qp.scale = {0.5f, 0.25f};
  qp.symmetric = true;
  const Tensor x({2, 3}, std::vector<float>{0.3f, 0.8f, -100.0f, 0.3f, 0.1f, 0.2f});
  const Tensor y = fake_quant(x, qp);
  const std::vector<float> want{0.5f, 1.0f, -64.0f, 0.25f, 0.0f, 0.25f};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_FLOAT_EQ(y[i], want[i]) << i;
}

TEST(Int8Kernel, WithinOneLsbOfFakeQuantSimulation) {
  Rng rng(42);
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
      for (std::size_t c = 0; c < cols; ++c)
        absmax[r] = std::max(absmax[r], std::fabs(w[r * cols + c]));
    const QuantParams w_qp = symmetric_params(absmax, 8);
    const Tensor y = conv1d_k1(x, w, b);
    const auto [ylo, yhi] = std::minmax_element(y.data().begin(), y.data().end());
    const QuantParams out_qp = asymmetric_params(*ylo, *yhi, 8);

    const QuantizedMatrix qm = quantize_weights(w.data(), rows, cols, w_qp);
    const std::vector<std::int32_t> qb = quantize_bias(b.data(), in_qp.scale[0], qm);
    const TensorI8 q = int8_conv1d_k1(quantize_tensor<std::int8_t>(x, in_qp), in_qp,
                                      TensorI8({rows, cols}, std::vector<std::int8_t>(qm.values)),
                                      w_qp, TensorI32({rows}, qb), out_qp);
    const Tensor xf = fake_quant(x, in_qp);
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = double(in_qp.scale[0]) * w_qp.scale[r];
      for (std::size_t j = 0; j < n; ++j) {
        double acc = qb[r] * s;
        for (std::size_t c = 0; c < cols; ++c)
          acc += double(fake_quant(w[r * cols + c], w_qp.scale[r], 0, -128, 127)) * xf[c * n + j];
        const std::int32_t sim =
            quantize_value(static_cast<float>(acc), out_qp.scale[0], out_qp.zero_point, -128, 127);
        worst = std::max<std::int64_t>(worst, std::llabs(std::int64_t(sim) - q[r * n + j]));
      }
    }
  }
  EXPECT_LE(worst, 1);
}

TEST(Int8Kernel, QuantizeDequantizeRoundTrip) {
  Rng rng(43);
  const Tensor x = random_tensor({5, 7}, rng, 2.0);
  const QuantParams qp = asymmetric_params(-2.0f, 2.0f, 8);
  const Tensor back = dequantize_tensor(quantize_tensor<std::int8_t>(x, qp), qp);
  EXPECT_LE(testing::max_abs_diff(back, x), 0.5 * qp.scale[0] * (1 + 1e-6));
  EXPECT_EQ(back, fake_quant(x, qp));
  const QuantParams q16 = asymmetric_params(-2.0f, 2.0f, 16);
  const Tensor back16 = dequantize_tensor(quantize_tensor<std::int16_t>(x, q16), q16);
  EXPECT_LE(testing::max_abs_diff(back16, x), 0.5 * q16.scale[0] * (1 + 1e-6));
}

TEST(Int16Gemm, WideAccumulatorMatchesExactSum) {
  QuantizedMatrix w;
  w.rows = 1;
  w.cols = 4096;
  w.values.assign(4096, 127);
  w.scale = {1.0f};
  const std::vector<std::int16_t> x(4096, 32767);
  const std::vector<std::int32_t> bias{5};
  std::vector<std::int64_t> acc(1);
  int_gemm(std::span<const std::int16_t>(x), 0, 1, w, bias, acc);
  EXPECT_EQ(acc[0], std::int64_t(4096) * 127 * 32767 + 5);
}

// ---------------------------------------------------------------------------

TEST(Presets, NamesInOrder) {
  EXPECT_EQ(preset_names(), (std::vector<std::string>{
                                "fp32", "int8", "mix-lstm", "mix-lstm-fpconv",
                                "mix-lstm-fpconv-mixmlp", "mix-lstm-fpconv-fullmlp"}));
  EXPECT_THROW(make_preset("int4", ModelConfig{}), Error);
}

TEST(Presets, EveryNodeAssigned) {
  for (const ModelConfig& cfg : {ModelConfig::separation(), ModelConfig::extraction()}) {
    ModelConfig c2 = cfg;
    c2.compression = 2;
    for (const ModelConfig& c : {cfg, c2}) {
      for (const std::string& name : preset_names()) {
        const PrecisionPlan plan = make_preset(name, c);
        EXPECT_TRUE(plan.unassigned(c).empty()) << name;
        EXPECT_TRUE(plan.unknown(c).empty()) << name;
        EXPECT_NO_THROW(plan.validate(c));
      }
    }
  }
}

TEST(Presets, MissingNodeIsReported) {
  const ModelConfig cfg;
  PrecisionPlan plan = make_preset("int8", cfg);
  plan.entries.erase("blk4.lstm.cell");
  ASSERT_EQ(plan.unassigned(cfg), std::vector<std::string>{"blk4.lstm.cell"});
  try {
    plan.validate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("blk4.lstm.cell"), std::string::npos);
  }
}

TEST(Presets, PrecisionTable) {
  const ModelConfig cfg;
  auto p = [&](const std::string& preset, const std::string& node) {
    return make_preset(preset, cfg).at(node).precision;
  };
  EXPECT_TRUE(make_preset("fp32", cfg).all_f32());
  EXPECT_EQ(p("int8", "blk1.lstm.cell"), Precision::kInt8);
  EXPECT_EQ(p("int8", "enc.weight"), Precision::kInt8);
  EXPECT_EQ(p("mix-lstm", "blk1.lstm.cell"), Precision::kBF16);
  EXPECT_EQ(p("mix-lstm", "blk1.lstm.wx.out"), Precision::kBF16);
  EXPECT_EQ(p("mix-lstm", "blk1.lstm.wx.weight"), Precision::kInt8);
  EXPECT_EQ(p("mix-lstm", "enc.out"), Precision::kInt8);
  EXPECT_EQ(p("mix-lstm-fpconv", "enc.weight"), Precision::kBF16);
  EXPECT_EQ(p("mix-lstm-fpconv", "dec.out"), Precision::kBF16);
  EXPECT_EQ(p("mix-lstm-fpconv", "blk2.mix1.tok.fc1.out"), Precision::kInt8);
  for (std::size_t b = 1; b <= 6; ++b) {
    const std::string blk = "blk" + std::to_string(b);
    const Precision odd = b % 2 == 1 ? Precision::kInt16 : Precision::kInt8;
    EXPECT_EQ(p("mix-lstm-fpconv-mixmlp", blk + ".mix1.tok.fc1.out"), odd) << b;
    EXPECT_EQ(p("mix-lstm-fpconv-mixmlp", blk + ".mix2.ch.res"), odd) << b;
    EXPECT_EQ(p("mix-lstm-fpconv-mixmlp", blk + ".mix1.ch.fc2.weight"), Precision::kInt8);
    EXPECT_EQ(p("mix-lstm-fpconv-fullmlp", blk + ".mix2.tok.fc2.in"), Precision::kInt16);
    EXPECT_EQ(p("mix-lstm-fpconv-fullmlp", blk + ".mix2.tok.fc2.weight"), Precision::kInt8);
  }
}

TEST(Plan, JsonRoundTripAfterCalibration) {
  const ModelConfig cfg;
  InitOptions o;
  o.seed = 44;
  const Model model(cfg, init_random(cfg, o));
  const std::vector<std::vector<float>> audio{speech_like(96 * 30, 1)};
  const PrecisionPlan plan = calibrate(model, make_preset("mix-lstm-fpconv-mixmlp", cfg), audio);
  const PrecisionPlan back = plan_from_json(plan_to_json(plan));
  EXPECT_EQ(back.preset, plan.preset);
  EXPECT_EQ(back.entries, plan.entries);
  for (const auto& [name, a] : plan.entries) {
    if (is_integer(a.precision)) {
      EXPECT_TRUE(a.qp.has_value()) << name;
    }
  }
  EXPECT_THROW(plan_from_json(nlohmann::json{{"preset", "x"}, {"entries", 3}}), Error);
}

TEST(Plan, CalibratedActivationsCoverZero) {
  const ModelConfig cfg;
  InitOptions o;
  o.seed = 45;
  const Model model(cfg, init_random(cfg, o));
  const std::vector<std::vector<float>> audio{speech_like(96 * 20, 2)};
  const PrecisionPlan plan = calibrate(model, make_preset("int8", cfg), audio);
  for (const auto& [name, a] : plan.entries) {
    if (!a.qp || a.qp->symmetric) continue;
    const QuantParams& qp = *a.qp;
    EXPECT_GE(qp.zero_point, qp.qmin()) << name;
    EXPECT_LE(qp.zero_point, qp.qmax()) << name;
    EXPECT_EQ(fake_quant(0.0f, qp.scale[0], qp.zero_point, qp.qmin(), qp.qmax()), 0.0f) << name;
  }
}

// ---------------------------------------------------------------------------

TEST(MixedLstm, CloseToFloatReference) {
  Rng rng(46);
  LstmParams p;
  p.wx = random_tensor({128, 32}, rng, 1.0 / std::sqrt(32.0));
  p.wh = random_tensor({128, 32}, rng, 1.0 / std::sqrt(32.0));
  p.bias = random_tensor({128}, rng, 0.1);
  p.proj = {random_tensor({32, 32}, rng, 1.0 / std::sqrt(32.0)), random_tensor({32}, rng, 0.1)};
  std::vector<Tensor> frames;
  for (int t = 0; t < 40; ++t) frames.push_back(random_tensor({32, 81}, rng));
  const LstmLayers mixed = mixed_lstm_layers(p, std::span<const Tensor>(frames).first(20));
  LstmState a = LstmState::zeros(32, 81), b = LstmState::zeros(32, 81);
  double err = 0.0, ref = 0.0;
  for (const Tensor& f : frames) {
    const Tensor y = mixed_lstm_step(f, mixed, a);
    const Tensor r = conv_batched_lstm_step(f, p, b);
    for (std::size_t i = 0; i < y.size(); ++i) {
      err += (double(y[i]) - r[i]) * (double(y[i]) - r[i]);
      ref += double(r[i]) * r[i];
    }
  }
  EXPECT_LT(std::sqrt(err / ref), 1e-2);
}

TEST(MixedLstm, HundredStepsStayFiniteAndBounded) {
  Rng rng(47);
  LstmParams p;
  p.wx = random_tensor({128, 32}, rng, 0.5);
  p.wh = random_tensor({128, 32}, rng, 0.5);
  p.bias = random_tensor({128}, rng, 0.5);
  p.proj = {random_tensor({32, 32}, rng, 0.2), random_tensor({32}, rng, 0.1)};
  std::vector<Tensor> calib;
  for (int t = 0; t < 10; ++t) calib.push_back(random_tensor({32, 81}, rng));
  const LstmLayers mixed = mixed_lstm_layers(p, calib);
  LstmState s = LstmState::zeros(32, 81);
  for (int t = 0; t < 100; ++t) {
    const Tensor y = mixed_lstm_step(random_tensor({32, 81}, rng, 2.0), mixed, s);
    for (float v : y.data()) ASSERT_TRUE(std::isfinite(v));
    for (float v : s.c.data()) ASSERT_LE(std::fabs(v), 100.0f);
    for (float v : s.h.data()) ASSERT_LE(std::fabs(v), 1.0f);
  }
  EXPECT_THROW(mixed_lstm_layers(p, {}), Error);
}

// ---------------------------------------------------------------------------

class PresetFidelity : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const ModelConfig cfg;
    InitOptions o;
    o.seed = 3;
    model_ = new Model(cfg, init_random(cfg, o));
    const std::vector<std::vector<float>> calib{speech_like(16000, 11), speech_like(16000, 12)};
    const std::vector<float> x = speech_like(16000, 13);
    const Tensor ref = model_->forward_offline(x);
    scores_ = new std::map<std::string, double>;
    for (const std::string& name : preset_names()) {
      const Model q = quantize_model(*model_, name, calib);
      const Tensor y = q.forward_offline(x);
      const std::size_t n = ref.dim(1);
      double total = 0.0;
      for (std::size_t k = 0; k < ref.dim(0); ++k) {
        total += si_sdr(std::span<const float>(ref.data()).subspan(k * n, n),
                        std::span<const float>(y.data()).subspan(k * n, n));
      }
      (*scores_)[name] = total / double(ref.dim(0));
    }
  }
  static void TearDownTestSuite() {
    delete model_;
    delete scores_;
  }
  static double score(const std::string& name) { return scores_->at(name); }

  static Model* model_;
  static std::map<std::string, double>* scores_;
};

Model* PresetFidelity::model_ = nullptr;
std::map<std::string, double>* PresetFidelity::scores_ = nullptr;

TEST_F(PresetFidelity, Fp32IsBitExact) { EXPECT_GT(score("fp32"), 100.0); }

TEST_F(PresetFidelity, FrozenLowerBounds) {
  for (const auto& [name, s] : *scores_) std::printf("  %-26s %.2f dB\n", name.c_str(), s);
  EXPECT_GT(score("int8"), 10.5);
  EXPECT_GT(score("mix-lstm"), 11.0);
  EXPECT_GT(score("mix-lstm-fpconv"), 11.5);
  EXPECT_GT(score("mix-lstm-fpconv-mixmlp"), 15.0);
  EXPECT_GT(score("mix-lstm-fpconv-fullmlp"), 33.0);
}

TEST_F(PresetFidelity, WiderActivationsDoNotHurt) {
  EXPECT_GT(score("mix-lstm"), score("int8"));
  EXPECT_GT(score("mix-lstm-fpconv"), score("mix-lstm"));
  EXPECT_GT(score("mix-lstm-fpconv-mixmlp"), score("mix-lstm-fpconv"));
  EXPECT_GT(score("mix-lstm-fpconv-fullmlp"), score("mix-lstm-fpconv-mixmlp"));
}

}  // namespace
}  // namespace tfmlp
