// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/calibrate.hpp"

#include <algorithm>

#include "core/signals.hpp"

namespace tfmlp {

namespace {

constexpr std::uint64_t kCalibrationEmbeddingSeed = 0x5eed'0001;

// Populates the QuantParams of every integer entry in `plan`.
void fill_params(PrecisionPlan& plan, const RangeTable& ranges,
                 const std::vector<const AffineLayer*>& float_layers) {
  std::map<std::string, const AffineLayer*> by_weight;
  for (const AffineLayer* l : float_layers) by_weight[l->name + ".weight"] = l;

  for (auto& [name, a] : plan.entries) {
    if (!is_integer(a.precision)) {
      a.qp.reset();
      continue;
    }
    const auto w = by_weight.find(name);
    if (w != by_weight.end()) {
      require(a.precision == Precision::kInt8, name + ": integer weights must be int8");
      a.qp = symmetric_params(weight_channel_absmax(*w->second), 8);
      continue;
    }
    require(ranges.contains(name), "calibration never reached node " + name);
    const auto [lo, hi] = ranges.range(name);
    a.qp = asymmetric_params(lo, hi, precision_bits(a.precision));
  }
}

}  // namespace

void RangeTable::observe(const std::string& node, std::span<const float> values) {
  if (values.empty()) return;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  check_finite(std::span<const float>(&*mn, 1), node);
  check_finite(std::span<const float>(&*mx, 1), node);
  auto it = ranges_.find(node);
  if (it == ranges_.end()) {
    ranges_.emplace(node, std::make_pair(*mn, *mx));
  } else {
    it->second.first = std::min(it->second.first, *mn);
    it->second.second = std::max(it->second.second, *mx);
  }
}

std::pair<float, float> RangeTable::range(const std::string& node) const {
  const auto it = ranges_.find(node);
  require(it != ranges_.end(), "no observations for " + node);
  return it->second;
}

ForwardHooks RangeTable::hooks() {
  ForwardHooks h;
  h.observe = [this](const std::string& node, std::span<const float> v) { observe(node, v); };
  return h;
}

PrecisionPlan calibrate(const Model& model, PrecisionPlan plan,
                        std::span<const std::vector<float>> audio,
                        std::span<const std::vector<float>> embeddings) {
  require(!audio.empty(), "calibration needs at least one utterance");
  plan.validate(model.config());
  const Model reference(model.config(), model.params());
  std::vector<float> fallback;
  if (model.config().film && embeddings.empty()) {
    fallback = random_embedding(model.config().embed_dim, kCalibrationEmbeddingSeed);
  }

  RangeTable ranges;
  const ForwardHooks hooks = ranges.hooks();
  for (std::size_t i = 0; i < audio.size(); ++i) {
    std::span<const float> emb;
    if (model.config().film) emb = embeddings.empty() ? fallback : embeddings[i % embeddings.size()];
    reference.forward_offline(audio[i], emb, hooks);
  }
  fill_params(plan, ranges, reference.layers());
  return plan;
}

Model apply_plan(const Model& model, PrecisionPlan plan) {
  return Model(model.config(), model.params(), std::move(plan));
}

Model quantize_model(const Model& model, const std::string& preset,
                     std::span<const std::vector<float>> audio,
                     std::span<const std::vector<float>> embeddings) {
  return apply_plan(model, calibrate(model, make_preset(preset, model.config()), audio,
                                     embeddings));
}

LstmLayers mixed_lstm_layers(const LstmParams& params, std::span<const Tensor> calibration) {
  require(!calibration.empty(), "mixed LSTM calibration needs at least one frame");
  const LstmLayers reference = lstm_layers(params, "lstm");

  PrecisionPlan plan;
  plan.preset = "mix-lstm";
  for (const AffineLayer* l : {&reference.wx, &reference.wh, &reference.proj}) {
    plan.entries[l->name + ".weight"] = {Precision::kInt8, std::nullopt};
    plan.entries[l->in.name] = {Precision::kInt8, std::nullopt};
    plan.entries[l->out.name] = {Precision::kBF16, std::nullopt};
  }
  for (const Edge* e : {&reference.gates, &reference.act, &reference.cell,
                        &reference.hidden_state, &reference.res}) {
    plan.entries[e->name] = {Precision::kBF16, std::nullopt};
  }

  RangeTable ranges;
  const ForwardHooks hooks = ranges.hooks();
  LstmState state = LstmState::zeros(reference.hidden, calibration.front().dim(1));
  for (const Tensor& frame : calibration) run_lstm_step(reference, frame, state, hooks);
  fill_params(plan, ranges, {&reference.wx, &reference.wh, &reference.proj});

  LstmLayers mixed = reference;
  for (AffineLayer* l : {&mixed.wx, &mixed.wh, &mixed.proj}) assign_precision(*l, plan);
  for (Edge* e : {&mixed.gates, &mixed.act, &mixed.cell, &mixed.hidden_state, &mixed.res}) {
    e->assign = plan.at(e->name);
  }
  return mixed;
}

Tensor mixed_lstm_step(const Tensor& latent, const LstmLayers& layers, LstmState& state) {
  return run_lstm_step(layers, latent, state, {});
}

}  // namespace tfmlp
