// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_BASELINES_HPP_
#define TFMLP_CORE_BASELINES_HPP_

#include <cstdint>

#include "core/model.hpp"
#include "json.hpp"

namespace tfmlp {

// Frequency stage of a dual-path model: a bidirectional LSTM run
// sequentially over the bins of one frame, projected back to C channels
// with a residual add.
struct BiLstmParams {
  LstmParams forward;   // proj unused
  LstmParams backward;  // proj unused
  DenseParams proj;     // [C x 2H]
};

BiLstmParams init_bilstm(std::size_t channels, std::size_t hidden, std::uint64_t seed);
std::size_t bilstm_param_count(std::size_t channels, std::size_t hidden);
// Hidden size whose parameter count is closest to `budget`.
std::size_t bilstm_hidden_for_budget(std::size_t channels, std::size_t budget);

// x: [C x F] -> [C x F].
Tensor bilstm_frequency_stage(const Tensor& x, const BiLstmParams& params);

// The conv-batched LSTM layer computed bin by bin: reference cell, then
// projection and residual for each bin in turn. x: [C x F'] -> [C x F'].
Tensor sequential_lstm_layer(const Tensor& x, const LstmParams& params, LstmState& state);

struct RuntimeComparison {
  std::size_t chunks = 0;
  std::size_t mixer_params = 0;
  std::size_t bilstm_params = 0;
  std::size_t bilstm_hidden = 0;
  double mixer_ms = 0.0;           // median per chunk, all mixer repetitions of one block
  double bilstm_ms = 0.0;          // median per chunk, sequential per-bin BiLSTM
  double conv_lstm_ms = 0.0;       // median per chunk, conv-batched LSTM step
  double reference_lstm_ms = 0.0;  // median per chunk, sequential_lstm_layer

  double mixer_speedup() const { return bilstm_ms / mixer_ms; }
  double lstm_speedup() const { return reference_lstm_ms / conv_lstm_ms; }
  nlohmann::json to_json() const;
};

// Times one block's frequency and time stages against the sequential
// baselines on the same random frames.
RuntimeComparison compare_runtime(const ModelConfig& cfg, std::size_t chunks,
                                  std::uint64_t seed = 0);

}  // namespace tfmlp

#endif  // TFMLP_CORE_BASELINES_HPP_
