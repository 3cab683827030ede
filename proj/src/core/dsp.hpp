// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_DSP_HPP_
#define TFMLP_CORE_DSP_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace tfmlp {

enum class WindowKind { kSqrtHann };

// Periodic window: w[n] = sqrt(0.5 - 0.5 cos(2 pi n / len)).
Tensor make_window(WindowKind kind, std::size_t len);

// Precomputed twiddles for a direct real DFT of length N.
class DftTables {
 public:
  explicit DftTables(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  // cos/sin of 2 pi k n / N, indexed by (k * n) mod N.
  double cos_at(std::size_t kn) const noexcept { return cos_[kn % n_]; }
  double sin_at(std::size_t kn) const noexcept { return sin_[kn % n_]; }

 private:
  std::size_t n_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// Framing parameters. Defaults: 16 kHz, 10 ms window, 6 ms hop, fft == win.
struct FrameConfig {
  std::size_t sample_rate = 16000;
  std::size_t win_len = 160;
  std::size_t hop_len = 96;
  std::size_t fft_size = 160;
  std::vector<float> window;
  std::vector<float> synthesis_window;
  std::shared_ptr<const DftTables> dft;

  static FrameConfig make(std::size_t sample_rate = 16000, std::size_t win_len = 160,
                          std::size_t hop_len = 96, std::size_t fft_size = 160);

  std::size_t bins() const noexcept { return fft_size / 2 + 1; }
  // Chunks of zeros emitted by the synthesizer before the normalizer is full.
  std::size_t warmup_chunks() const noexcept {
    return (win_len + hop_len - 1) / hop_len - 1;
  }
  // Delay between an input sample and its reconstruction, in samples.
  std::size_t reconstruction_delay() const noexcept { return win_len - hop_len; }
  double hop_seconds() const noexcept {
    return static_cast<double>(hop_len) / static_cast<double>(sample_rate);
  }

  void validate() const;
};

struct StftState {
  std::vector<float> analysis_buffer;  // last win_len - hop_len input samples
  Tensor ola_buffer;                   // [streams x win_len]
  std::vector<double> ola_norm;        // running sum of analysis*synthesis windows
  std::size_t frames_synthesized = 0;

  static StftState make(const FrameConfig& cfg, std::size_t streams);
};

// Windowed DFT of one win_len frame: returns [2 x F x 1], real parts in
// channel 0 and imaginary parts in channel 1.
Tensor analyze_frame(std::span<const float> samples, const FrameConfig& cfg);

Tensor stft_step(std::span<const float> chunk, StftState& state, const FrameConfig& cfg);

// frame: [2S x F x 1], channels 0..S-1 real and S..2S-1 imaginary.
// Returns [S x hop_len] audio.
Tensor istft_step(const Tensor& frame, StftState& state, const FrameConfig& cfg);

// Whole-signal framing. Frame t covers samples
// [t*hop + hop - win, t*hop + hop), zero before the start. Only complete
// hops are framed. Returns [2 x F x T].
Tensor stft_offline(std::span<const float> signal, const FrameConfig& cfg);

// Overlap-add resynthesis of [2S x F x T]; returns [S x T*hop].
Tensor istft_offline(const Tensor& frames, const FrameConfig& cfg);

}  // namespace tfmlp

#endif  // TFMLP_CORE_DSP_HPP_
