// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/plan.hpp"

#include <algorithm>
#include <set>

namespace tfmlp {

std::vector<GraphLayer> graph_layers(const ModelConfig& cfg) {
  std::vector<GraphLayer> layers;
  layers.push_back({"enc", NodeRole::kEncoder, 0});
  if (cfg.film) {
    layers.push_back({"film.gamma", NodeRole::kFilm, 0});
    layers.push_back({"film.beta", NodeRole::kFilm, 0});
  }
  if (cfg.compression > 1) layers.push_back({"compress", NodeRole::kCompress, 0});
  for (std::size_t b = 1; b <= cfg.blocks; ++b) {
    const std::string blk = "blk" + std::to_string(b);
    for (std::size_t m = 1; m <= cfg.mixer_repeats; ++m) {
      const std::string mix = blk + ".mix" + std::to_string(m);
      for (const char* part : {".tok.fc1", ".tok.fc2", ".ch.fc1", ".ch.fc2"}) {
        layers.push_back({mix + part, NodeRole::kMixer, b});
      }
    }
    layers.push_back({blk + ".lstm.wx", NodeRole::kLstmConv, b});
    layers.push_back({blk + ".lstm.wh", NodeRole::kLstmConv, b});
    layers.push_back({blk + ".lstm.proj", NodeRole::kLstmProj, b});
  }
  if (cfg.compression > 1) layers.push_back({"decompress", NodeRole::kDecompress, 0});
  layers.push_back({"dec", NodeRole::kDecoder, 0});
  return layers;
}

std::vector<GraphNode> graph_nodes(const ModelConfig& cfg) {
  std::vector<GraphNode> nodes;
  for (const GraphLayer& layer : graph_layers(cfg)) {
    nodes.push_back({layer.name + ".weight", NodeKind::kWeight, layer.role, layer.block});
    nodes.push_back({layer.name + ".in", NodeKind::kInput, layer.role, layer.block});
    nodes.push_back({layer.name + ".out", NodeKind::kOutput, layer.role, layer.block});
  }
  if (cfg.film) nodes.push_back({"film.out", NodeKind::kEdge, NodeRole::kFilm, 0});
  for (std::size_t b = 1; b <= cfg.blocks; ++b) {
    const std::string blk = "blk" + std::to_string(b);
    for (std::size_t m = 1; m <= cfg.mixer_repeats; ++m) {
      const std::string mix = blk + ".mix" + std::to_string(m);
      nodes.push_back({mix + ".tok.res", NodeKind::kEdge, NodeRole::kMixer, b});
      nodes.push_back({mix + ".ch.res", NodeKind::kEdge, NodeRole::kMixer, b});
    }
    for (const char* edge : {".lstm.gates", ".lstm.act", ".lstm.cell", ".lstm.hidden"}) {
      nodes.push_back({blk + edge, NodeKind::kEdge, NodeRole::kLstmElementwise, b});
    }
    nodes.push_back({blk + ".lstm.res", NodeKind::kEdge, NodeRole::kLstmProj, b});
  }
  return nodes;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fp32", "int8", "mix-lstm", "mix-lstm-fpconv", "mix-lstm-fpconv-mixmlp",
      "mix-lstm-fpconv-fullmlp"};
  return names;
}

namespace {

Precision preset_precision(std::size_t level, const GraphNode& node) {
  // level: index into preset_names().
  if (level == 0) return Precision::kF32;
  const bool mix_lstm = level >= 2;
  const bool fp_conv = level >= 3;
  const bool mix_mlp = level == 4;
  const bool full_mlp = level == 5;

  if (mix_lstm) {
    const bool lstm = node.role == NodeRole::kLstmConv || node.role == NodeRole::kLstmProj ||
                      node.role == NodeRole::kLstmElementwise;
    if (lstm && (node.kind == NodeKind::kOutput || node.kind == NodeKind::kEdge)) {
      return Precision::kBF16;
    }
  }
  if (fp_conv && (node.role == NodeRole::kEncoder || node.role == NodeRole::kDecoder)) {
    return Precision::kBF16;
  }
  if (node.role == NodeRole::kMixer && node.kind != NodeKind::kWeight) {
    if (full_mlp) return Precision::kInt16;
    if (mix_mlp && node.block % 2 == 1) return Precision::kInt16;
  }
  return Precision::kInt8;
}

}  // namespace

PrecisionPlan make_preset(const std::string& name, const ModelConfig& cfg) {
  const auto& names = preset_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    raise(ErrorKind::kConfig, "unknown preset '" + name + "' (known: " + known + ")");
  }
  const std::size_t level = static_cast<std::size_t>(it - names.begin());
  PrecisionPlan plan;
  plan.preset = name;
  for (const GraphNode& node : graph_nodes(cfg)) {
    plan.entries[node.name] = Assignment{preset_precision(level, node), std::nullopt};
  }
  return plan;
}

const Assignment& PrecisionPlan::at(const std::string& node) const {
  const auto it = entries.find(node);
  if (it == entries.end()) raise(ErrorKind::kConfig, "precision plan has no entry for " + node);
  return it->second;
}

std::vector<std::string> PrecisionPlan::unassigned(const ModelConfig& cfg) const {
  std::vector<std::string> missing;
  for (const GraphNode& node : graph_nodes(cfg)) {
    if (!entries.count(node.name)) missing.push_back(node.name);
  }
  return missing;
}

std::vector<std::string> PrecisionPlan::unknown(const ModelConfig& cfg) const {
  std::set<std::string> known;
  for (const GraphNode& node : graph_nodes(cfg)) known.insert(node.name);
  std::vector<std::string> extra;
  for (const auto& [name, a] : entries) {
    if (!known.count(name)) extra.push_back(name);
  }
  return extra;
}

void PrecisionPlan::validate(const ModelConfig& cfg) const {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& n : v) s += (s.empty() ? "" : ", ") + n;
    return s;
  };
  const auto missing = unassigned(cfg);
  if (!missing.empty()) {
    raise(ErrorKind::kConfig, "precision plan leaves " + std::to_string(missing.size()) +
                                  " node(s) unassigned: " + join(missing));
  }
  const auto extra = unknown(cfg);
  if (!extra.empty()) {
    raise(ErrorKind::kConfig, "precision plan names unknown node(s): " + join(extra));
  }
}

bool PrecisionPlan::all_f32() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const auto& kv) { return kv.second.precision == Precision::kF32; });
}

nlohmann::json quant_params_to_json(const QuantParams& qp) {
  nlohmann::json doc = {{"scale", qp.scale},
                        {"zero_point", qp.zero_point},
                        {"bits", qp.bits},
                        {"symmetric", qp.symmetric}};
  if (!qp.observed_min.empty()) doc["min"] = qp.observed_min;
  if (!qp.observed_max.empty()) doc["max"] = qp.observed_max;
  return doc;
}

QuantParams quant_params_from_json(const nlohmann::json& doc) {
  QuantParams qp;
  try {
    qp.scale = doc.at("scale").get<std::vector<float>>();
    qp.zero_point = doc.at("zero_point").get<std::int32_t>();
    qp.bits = doc.at("bits").get<int>();
    qp.symmetric = doc.value("symmetric", false);
    if (doc.contains("min")) qp.observed_min = doc.at("min").get<std::vector<float>>();
    if (doc.contains("max")) qp.observed_max = doc.at("max").get<std::vector<float>>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kFormat, std::string("bad quantization parameters: ") + e.what());
  }
  qp.validate();
  return qp;
}

nlohmann::json plan_to_json(const PrecisionPlan& plan, bool include_weight_params) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [name, a] : plan.entries) {
    nlohmann::json e = {{"precision", to_string(a.precision)}};
    const bool is_weight = name.size() > 7 && name.ends_with(".weight");
    if (a.qp && (include_weight_params || !is_weight)) e["qp"] = quant_params_to_json(*a.qp);
    entries[name] = std::move(e);
  }
  return {{"preset", plan.preset}, {"entries", std::move(entries)}};
}

PrecisionPlan plan_from_json(const nlohmann::json& doc) {
  PrecisionPlan plan;
  try {
    plan.preset = doc.at("preset").get<std::string>();
    for (const auto& [name, e] : doc.at("entries").items()) {
      Assignment a;
      a.precision = parse_precision(e.at("precision").get<std::string>());
      if (e.contains("qp")) a.qp = quant_params_from_json(e.at("qp"));
      plan.entries[name] = std::move(a);
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kFormat, std::string("bad precision plan: ") + e.what());
  }
  return plan;
}

}  // namespace tfmlp
