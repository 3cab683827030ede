// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_PLAN_HPP_
#define TFMLP_CORE_PLAN_HPP_

#include <map>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/quant.hpp"
#include "json.hpp"

namespace tfmlp {

enum class NodeRole {
  kEncoder,
  kFilm,
  kCompress,
  kMixer,
  kLstmConv,         // input and recurrent gate convolutions
  kLstmElementwise,  // gates, nonlinearities, cell and hidden state
  kLstmProj,         // hidden -> latent projection and its residual sum
  kDecompress,
  kDecoder,
};

enum class NodeKind {
  kWeight,  // "<layer>.weight"
  kInput,   // "<layer>.in": quantization applied to a layer's input
  kOutput,  // "<layer>.out": result of the layer (after ReLU when present)
  kEdge,    // elementwise results: residual sums, LSTM internals, FiLM output
};

struct GraphNode {
  std::string name;
  NodeKind kind;
  NodeRole role;
  std::size_t block = 0;  // 1-based MLPNet block, 0 outside the blocks
};

struct GraphLayer {
  std::string name;
  NodeRole role;
  std::size_t block = 0;
};

// Affine layers in execution order.
std::vector<GraphLayer> graph_layers(const ModelConfig& cfg);
// Every node a precision plan must assign.
std::vector<GraphNode> graph_nodes(const ModelConfig& cfg);

// Names accepted by make_preset, in increasing precision order.
const std::vector<std::string>& preset_names();

// Per-node precision assignment. Integer entries carry QuantParams once
// calibrated: per-channel symmetric for weights, per-tensor asymmetric for
// activations.
struct PrecisionPlan {
  std::string preset = "fp32";
  std::map<std::string, Assignment> entries;

  const Assignment& at(const std::string& node) const;
  // Nodes of `cfg` with no entry, and entries naming no node of `cfg`.
  std::vector<std::string> unassigned(const ModelConfig& cfg) const;
  std::vector<std::string> unknown(const ModelConfig& cfg) const;
  // Throws a configuration error listing unassigned or unknown nodes.
  void validate(const ModelConfig& cfg) const;
  bool all_f32() const;
};

// Precisions only; integer QuantParams are filled in by calibration.
PrecisionPlan make_preset(const std::string& name, const ModelConfig& cfg);

nlohmann::json plan_to_json(const PrecisionPlan& plan, bool include_weight_params = true);
PrecisionPlan plan_from_json(const nlohmann::json& doc);
nlohmann::json quant_params_to_json(const QuantParams& qp);
QuantParams quant_params_from_json(const nlohmann::json& doc);

}  // namespace tfmlp

#endif  // TFMLP_CORE_PLAN_HPP_
