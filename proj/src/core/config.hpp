// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_CONFIG_HPP_
#define TFMLP_CORE_CONFIG_HPP_

#include <cstddef>
#include <string>

#include "core/dsp.hpp"
#include "json.hpp"

namespace tfmlp {

// Hyperparameters of the separation network. Defaults are the two-speaker
// separation model; mixer_expansion is tuned so that the default model has
// ~493K parameters.
struct ModelConfig {
  std::size_t blocks = 6;          // MLPNet blocks
  std::size_t mixer_repeats = 2;   // mixer repetitions per block
  std::size_t channels = 32;       // latent channels
  std::size_t hidden = 32;         // LSTM hidden size
  std::size_t speakers = 2;        // 2: blind separation, 1: target extraction
  std::size_t compression = 1;     // frequency compression factor: 1, 2, 4 or 6
  double mixer_expansion = 2.36;   // hidden width ratio of each mixer MLP
  bool film = false;               // d-vector conditioning after the encoder
  std::size_t embed_dim = 256;

  std::size_t sample_rate = 16000;
  std::size_t win_len = 160;
  std::size_t hop_len = 96;
  std::size_t fft_size = 160;

  static ModelConfig separation();
  static ModelConfig extraction();

  std::size_t freq_bins() const noexcept { return fft_size / 2 + 1; }
  // Bins seen by the MLPNet blocks: ceil(F / compression).
  std::size_t block_bins() const noexcept {
    return (freq_bins() + compression - 1) / compression;
  }
  std::size_t token_hidden() const;
  std::size_t channel_hidden() const;
  FrameConfig frame_config() const;

  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(const nlohmann::json& doc);

}  // namespace tfmlp

#endif  // TFMLP_CORE_CONFIG_HPP_
