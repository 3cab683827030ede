// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_INIT_HPP_
#define TFMLP_CORE_INIT_HPP_

#include <cstdint>

#include "core/model.hpp"

namespace tfmlp {

struct InitOptions {
  std::uint64_t seed = 0;
  bool zero_bias = false;
  float gain = 1.0f;  // multiplies the uniform bound gain / sqrt(fan_in)
};

// Draws every tensor in serialization order from one seeded stream.
ModelParams init_random(const ModelConfig& cfg, const InitOptions& options = {});

// Fan-in used for the uniform bound of parameter `name`.
std::size_t param_fan_in(const std::string& name, const Shape& shape, const ModelConfig& cfg);

}  // namespace tfmlp

#endif  // TFMLP_CORE_INIT_HPP_
