// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tfmlp {

Tensor make_window(WindowKind kind, std::size_t len) {
  require(len >= 2, "window length must be >= 2");
  Tensor w({len});
  switch (kind) {
    case WindowKind::kSqrtHann:
      for (std::size_t n = 0; n < len; ++n) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(n) /
                             static_cast<double>(len);
        w[n] = static_cast<float>(std::sqrt(std::max(0.0, 0.5 - 0.5 * std::cos(phase))));
      }
      break;
  }
  return w;
}

DftTables::DftTables(std::size_t n) : n_(n), cos_(n), sin_(n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
    cos_[i] = std::cos(phase);
    sin_[i] = std::sin(phase);
  }
}

FrameConfig FrameConfig::make(std::size_t sample_rate, std::size_t win_len,
                              std::size_t hop_len, std::size_t fft_size) {
  FrameConfig cfg;
  cfg.sample_rate = sample_rate;
  cfg.win_len = win_len;
  cfg.hop_len = hop_len;
  cfg.fft_size = fft_size;
  require(win_len >= 2, "win_len must be >= 2");
  const Tensor w = make_window(WindowKind::kSqrtHann, win_len);
  cfg.window.assign(w.data().begin(), w.data().end());
  cfg.synthesis_window = cfg.window;
  cfg.dft = std::make_shared<DftTables>(fft_size);
  cfg.validate();
  return cfg;
}

void FrameConfig::validate() const {
  require(sample_rate > 0, "sample_rate must be positive");
  require(hop_len >= 1 && hop_len <= win_len && win_len <= fft_size,
          "framing requires 1 <= hop_len <= win_len <= fft_size");
  require(window.size() == win_len && synthesis_window.size() == win_len,
          "window lengths must equal win_len");
  for (std::size_t n = 0; n < win_len; ++n) {
    require(std::isfinite(window[n]) && window[n] >= 0.0f &&
                std::isfinite(synthesis_window[n]) && synthesis_window[n] >= 0.0f,
            "window values must be finite and non-negative");
  }
  require(dft != nullptr && dft->size() == fft_size, "DFT tables missing");
}

StftState StftState::make(const FrameConfig& cfg, std::size_t streams) {
  StftState st;
  st.analysis_buffer.assign(cfg.win_len - cfg.hop_len, 0.0f);
  st.ola_buffer = Tensor({streams, cfg.win_len});
  st.ola_norm.assign(cfg.win_len, 0.0);
  return st;
}

Tensor analyze_frame(std::span<const float> samples, const FrameConfig& cfg) {
  require(samples.size() == cfg.win_len, "analysis frame must hold win_len samples");
  const std::size_t bins = cfg.bins();
  const DftTables& dft = *cfg.dft;
  std::vector<double> windowed(cfg.win_len);
  for (std::size_t n = 0; n < cfg.win_len; ++n)
    windowed[n] = static_cast<double>(samples[n]) * cfg.window[n];
  Tensor frame({2, bins, 1});
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < cfg.win_len; ++n) {
      re += windowed[n] * dft.cos_at(k * n);
      im -= windowed[n] * dft.sin_at(k * n);
    }
    frame[k] = static_cast<float>(re);
    frame[bins + k] = static_cast<float>(im);
  }
  return frame;
}

Tensor stft_step(std::span<const float> chunk, StftState& state, const FrameConfig& cfg) {
  if (chunk.size() != cfg.hop_len) {
    raise(ErrorKind::kFraming, "chunk has " + std::to_string(chunk.size()) +
                                   " samples, expected " + std::to_string(cfg.hop_len));
  }
  std::vector<float> frame(cfg.win_len);
  const std::size_t keep = cfg.win_len - cfg.hop_len;
  std::copy(state.analysis_buffer.begin(), state.analysis_buffer.end(), frame.begin());
  std::copy(chunk.begin(), chunk.end(), frame.begin() + keep);
  std::copy(frame.end() - keep, frame.end(), state.analysis_buffer.begin());
  return analyze_frame(frame, cfg);
}

Tensor istft_step(const Tensor& frame, StftState& state, const FrameConfig& cfg) {
  const std::size_t bins = cfg.bins();
  require(frame.rank() >= 2 && frame.dim(1) == bins && frame.dim(0) % 2 == 0 &&
              frame.size() == frame.dim(0) * bins,
          "synthesis frame must be [2S x F x 1], got " + shape_string(frame.shape()));
  const std::size_t streams = frame.dim(0) / 2;
  require(state.ola_buffer.dim(0) == streams, "synthesis state stream count mismatch");
  const std::size_t n_fft = cfg.fft_size, win = cfg.win_len, hop = cfg.hop_len;
  const DftTables& dft = *cfg.dft;
  const double inv_n = 1.0 / static_cast<double>(n_fft);

  for (std::size_t s = 0; s < streams; ++s) {
    const float* re = frame.ptr() + s * bins;
    const float* im = frame.ptr() + (streams + s) * bins;
    float* ola = state.ola_buffer.row(s).data();
    for (std::size_t n = 0; n < win; ++n) {
      double acc = re[0];
      for (std::size_t k = 1; k < bins; ++k) {
        const double weight = (n_fft % 2 == 0 && k == n_fft / 2) ? 1.0 : 2.0;
        acc += weight * (re[k] * dft.cos_at(k * n) - im[k] * dft.sin_at(k * n));
      }
      ola[n] += static_cast<float>(acc * inv_n * cfg.synthesis_window[n]);
    }
  }
  for (std::size_t n = 0; n < win; ++n)
    state.ola_norm[n] += static_cast<double>(cfg.window[n]) * cfg.synthesis_window[n];

  Tensor out({streams, hop});
  if (state.frames_synthesized >= cfg.warmup_chunks()) {
    for (std::size_t s = 0; s < streams; ++s) {
      const float* ola = state.ola_buffer.row(s).data();
      for (std::size_t j = 0; j < hop; ++j) {
        const double norm = state.ola_norm[j];
        out[s * hop + j] = norm > 1e-10 ? static_cast<float>(ola[j] / norm) : 0.0f;
      }
    }
  }
  for (std::size_t s = 0; s < streams; ++s) {
    auto ola = state.ola_buffer.row(s);
    std::copy(ola.begin() + hop, ola.end(), ola.begin());
    std::fill(ola.end() - hop, ola.end(), 0.0f);
  }
  std::copy(state.ola_norm.begin() + hop, state.ola_norm.end(), state.ola_norm.begin());
  std::fill(state.ola_norm.end() - hop, state.ola_norm.end(), 0.0);
  ++state.frames_synthesized;
  return out;
}

Tensor stft_offline(std::span<const float> signal, const FrameConfig& cfg) {
  const std::size_t frames = signal.size() / cfg.hop_len;
  require(frames >= 1, "signal shorter than one hop");
  const std::size_t bins = cfg.bins();
  Tensor out({2, bins, frames});
  std::vector<float> window(cfg.win_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>((t + 1) * cfg.hop_len) -
                                 static_cast<std::ptrdiff_t>(cfg.win_len);
    for (std::size_t n = 0; n < cfg.win_len; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      window[n] = idx < 0 ? 0.0f : signal[static_cast<std::size_t>(idx)];
    }
    const Tensor frame = analyze_frame(window, cfg);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < bins; ++k) out[(c * bins + k) * frames + t] = frame[c * bins + k];
  }
  return out;
}

Tensor istft_offline(const Tensor& frames, const FrameConfig& cfg) {
  require(frames.rank() == 3 && frames.dim(1) == cfg.bins() && frames.dim(0) % 2 == 0,
          "istft_offline expects [2S x F x T]");
  const std::size_t channels = frames.dim(0), bins = frames.dim(1), count = frames.dim(2);
  const std::size_t streams = channels / 2, hop = cfg.hop_len;
  StftState state = StftState::make(cfg, streams);
  Tensor out({streams, count * hop});
  Tensor frame({channels, bins, 1});
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t k = 0; k < bins; ++k) frame[c * bins + k] = frames[(c * bins + k) * count + t];
    const Tensor chunk = istft_step(frame, state, cfg);
    for (std::size_t s = 0; s < streams; ++s)
      std::copy_n(chunk.ptr() + s * hop, hop, out.ptr() + s * count * hop + t * hop);
  }
  return out;
}

}  // namespace tfmlp
