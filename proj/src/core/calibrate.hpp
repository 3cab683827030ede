// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_CALIBRATE_HPP_
#define TFMLP_CORE_CALIBRATE_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/plan.hpp"

namespace tfmlp {

// Running per-node min/max of activation values.
class RangeTable {
 public:
  void observe(const std::string& node, std::span<const float> values);
  bool contains(const std::string& node) const { return ranges_.count(node) > 0; }
  std::pair<float, float> range(const std::string& node) const;
  ForwardHooks hooks();

 private:
  std::map<std::string, std::pair<float, float>> ranges_;
};

// Fills QuantParams for every integer node of `plan` by running the float
// version of `model` over `audio`. Extraction models use `embeddings`
// round-robin, or a fixed random embedding when none are given.
PrecisionPlan calibrate(const Model& model, PrecisionPlan plan,
                        std::span<const std::vector<float>> audio,
                        std::span<const std::vector<float>> embeddings = {});

// Same model under a new precision plan.
Model apply_plan(const Model& model, PrecisionPlan plan);

// make_preset + calibrate + apply_plan.
Model quantize_model(const Model& model, const std::string& preset,
                     std::span<const std::vector<float>> audio,
                     std::span<const std::vector<float>> embeddings = {});

// Conv-batched LSTM under the mix-lstm assignment: int8 gate and projection
// convolutions, bf16 elementwise math, cell and hidden state. Activation
// ranges come from running the float cell over `calibration` frames
// ([C x F'] each) from a zero state.
LstmLayers mixed_lstm_layers(const LstmParams& params, std::span<const Tensor> calibration);
Tensor mixed_lstm_step(const Tensor& latent, const LstmLayers& layers, LstmState& state);

}  // namespace tfmlp

#endif  // TFMLP_CORE_CALIBRATE_HPP_
