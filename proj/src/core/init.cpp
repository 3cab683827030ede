// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/init.hpp"

#include <cmath>

#include "core/signals.hpp"

namespace tfmlp {

std::size_t param_fan_in(const std::string& name, const Shape& shape, const ModelConfig& cfg) {
  if (name.ends_with(".lstm.bias")) return cfg.hidden;
  if (name.ends_with(".bias")) {
    if (name == "dec.bias") return cfg.channels * 9;
    if (name == "decompress.bias") return cfg.channels;
    if (name == "compress.bias") return cfg.channels * cfg.compression;
    if (name == "enc.bias") return 2 * 9;
    if (name.starts_with("film.")) return cfg.embed_dim;
    return 0;  // resolved by the caller from the preceding weight
  }
  if (name == "dec.weight") return shape[0] * shape[2] * shape[3];
  if (name == "decompress.weight") return shape[0];
  return shape_numel(shape) / shape[0];
}

ModelParams init_random(const ModelConfig& cfg, const InitOptions& options) {
  ModelParams p = zero_params(cfg);
  Rng rng(options.seed);
  std::size_t last_weight_fan_in = 1;
  for_each_param(p, [&](const std::string& name, Tensor& t) {
    const bool bias = name.ends_with(".bias");
    std::size_t fan_in = param_fan_in(name, t.shape(), cfg);
    if (fan_in == 0) fan_in = last_weight_fan_in;
    if (!bias) last_weight_fan_in = fan_in;
    if (bias && options.zero_bias) return;
    const double bound = options.gain / std::sqrt(static_cast<double>(fan_in));
    for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  });
  return p;
}

}  // namespace tfmlp
