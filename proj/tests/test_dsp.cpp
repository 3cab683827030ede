// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "core/dsp.hpp"
#include "core/error.hpp"
#include "core/signals.hpp"
#include "test_util.hpp"

namespace tfmlp {
namespace {

// Streams `x` through analysis and synthesis one hop at a time.
std::vector<float> roundtrip(const std::vector<float>& x, const FrameConfig& cfg) {
  StftState state = StftState::make(cfg, 1);
  std::vector<float> y;
  for (std::size_t c = 0; c + cfg.hop_len <= x.size(); c += cfg.hop_len) {
    const Tensor frame = stft_step(std::span<const float>(x).subspan(c, cfg.hop_len), state, cfg);
    const Tensor out = istft_step(frame, state, cfg);
    y.insert(y.end(), out.data().begin(), out.data().end());
  }
  return y;
}

TEST(Window, Endpoints) {
  const Tensor w = make_window(WindowKind::kSqrtHann, 160);
  EXPECT_EQ(w[0], 0.0f);
  EXPECT_FLOAT_EQ(w[80], 1.0f);
  for (std::size_t n = 0; n < 160; ++n) {
    const double ref = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 160.0));
    EXPECT_NEAR(w[n], ref, 1e-7);
  }
}

TEST(Window, OverlapSumPositiveAtEverySteadyStatePosition) {
  const Tensor w = make_window(WindowKind::kSqrtHann, 160);
  for (std::size_t pos = 0; pos < 96; ++pos) {
    double sum = 0.0;
    for (std::size_t off = pos; off < 160; off += 96) sum += double(w[off]) * w[off];
    EXPECT_GT(sum, 0.0) << pos;
  }
}

TEST(FrameConfig, Defaults) {
  const FrameConfig cfg = FrameConfig::make();
  EXPECT_EQ(cfg.bins(), 81u);
  EXPECT_EQ(cfg.reconstruction_delay(), 64u);
  EXPECT_DOUBLE_EQ(cfg.hop_seconds(), 0.006);
  EXPECT_THROW(FrameConfig::make(16000, 160, 200, 160), Error);
}

TEST(Stft, ZeroChunkGivesZeroFrame) {
  const FrameConfig cfg = FrameConfig::make();
  StftState state = StftState::make(cfg, 1);
  const std::vector<float> zeros(96, 0.0f);
  const Tensor frame = stft_step(zeros, state, cfg);
  ASSERT_EQ(frame.shape(), Shape({2, 81, 1}));
  for (float v : frame.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Stft, ConstantInputConcentratesAtDc) {
  const FrameConfig cfg = FrameConfig::make();
  StftState state = StftState::make(cfg, 1);
  const std::vector<float> ones(96, 1.0f);
  stft_step(ones, state, cfg);
  const Tensor frame = stft_step(ones, state, cfg);
  double wsum = 0.0;
  for (float v : cfg.window) wsum += v;
  EXPECT_NEAR(frame[0], wsum, 1e-4);
  EXPECT_NEAR(frame[81], 0.0, 1e-5);
  for (std::size_t k = 1; k < 81; ++k) {
    EXPECT_LT(std::hypot(frame[k], frame[81 + k]), 0.5 * wsum) << k;
  }
  EXPECT_LT(std::hypot(frame[40], frame[81 + 40]), 1e-3 * wsum);
}

TEST(Stft, BinCenterSinusoidMatchesNaiveDft) {
  const FrameConfig cfg = FrameConfig::make();
  const std::size_t k0 = 13;
  std::vector<float> x(160);
  for (std::size_t n = 0; n < 160; ++n) {
    x[n] = static_cast<float>(std::cos(2.0 * std::numbers::pi * k0 * n / 160.0 + 0.3));
  }
  const Tensor frame = analyze_frame(x, cfg);
  std::size_t peak = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < 81; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t n = 0; n < 160; ++n) {
      const long double v = static_cast<long double>(x[n]) * cfg.window[n];
      const long double ph = 2.0L * std::numbers::pi_v<long double> * k * n / 160.0L;
      re += v * std::cos(ph);
      im -= v * std::sin(ph);
    }
    EXPECT_NEAR(frame[k], static_cast<double>(re), 1e-5) << k;
    EXPECT_NEAR(frame[81 + k], static_cast<double>(im), 1e-5) << k;
    const double mag = std::hypot(frame[k], frame[81 + k]);
    if (mag > best) {
      best = mag;
      peak = k;
    }
  }
  EXPECT_EQ(peak, k0);
}

TEST(Stft, WrongChunkLengthIsFramingError) {
  const FrameConfig cfg = FrameConfig::make();
  StftState state = StftState::make(cfg, 1);
  const std::vector<float> x(95, 0.0f);
  try {
    stft_step(x, state, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFraming);
  }
}

TEST(Istft, ZeroFramesGiveZeroAudio) {
  const FrameConfig cfg = FrameConfig::make();
  StftState state = StftState::make(cfg, 2);
  for (int i = 0; i < 5; ++i) {
    const Tensor out = istft_step(Tensor({4, 81, 1}), state, cfg);
    ASSERT_EQ(out.shape(), Shape({2, 96}));
    for (float v : out.data()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Istft, RoundTripReconstructsOneSecond) {
  const FrameConfig cfg = FrameConfig::make();
  const std::vector<float> x = white_noise(16000, 21, 0.3f);
  const std::vector<float> y = roundtrip(x, cfg);
  const std::size_t delay = cfg.reconstruction_delay();
  double err = 0.0, ref = 0.0;
  for (std::size_t n = cfg.win_len; n + delay < y.size() && n + cfg.win_len < x.size(); ++n) {
    const double d = double(y[n + delay]) - x[n];
    err += d * d;
    ref += double(x[n]) * x[n];
  }
  EXPECT_LT(std::sqrt(err / ref), 1e-6);
}

TEST(Istft, ImpulseAppearsAfterTheWindowDelay) {
  const FrameConfig cfg = FrameConfig::make();
  for (std::size_t at : {500u, 611u, 1000u}) {
    std::vector<float> x(96 * 20, 0.0f);
    x[at] = 1.0f;
    const std::vector<float> y = roundtrip(x, cfg);
    std::size_t peak = 0;
    for (std::size_t n = 0; n < y.size(); ++n) {
      if (std::fabs(y[n]) > std::fabs(y[peak])) peak = n;
    }
    EXPECT_EQ(peak, at + cfg.win_len - cfg.hop_len);
    EXPECT_NEAR(y[peak], 1.0f, 1e-6);
  }
}

TEST(Stft, OfflineMatchesStreaming) {
  const FrameConfig cfg = FrameConfig::make();
  const std::vector<float> x = speech_like(96 * 30, 4);
  const Tensor off = stft_offline(x, cfg);
  ASSERT_EQ(off.shape(), Shape({2, 81, 30}));
  StftState state = StftState::make(cfg, 1);
  for (std::size_t t = 0; t < 30; ++t) {
    const Tensor f = stft_step(std::span<const float>(x).subspan(t * 96, 96), state, cfg);
    for (std::size_t i = 0; i < 2 * 81; ++i) ASSERT_EQ(f[i], off[i * 30 + t]) << t;
  }
  const Tensor back = istft_offline(off, cfg);
  const std::vector<float> y = roundtrip(x, cfg);
  ASSERT_EQ(back.size(), y.size());
  EXPECT_EQ(testing::max_abs_diff(back.data(), y), 0.0);
}

}  // namespace
}  // namespace tfmlp
