// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_CONTAINER_HPP_
#define TFMLP_CORE_CONTAINER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "json.hpp"

namespace tfmlp {

// Layout (all integers little-endian):
//   "TFMLPNET" | u32 version
//   u32 header length | UTF-8 JSON header (config, preset, precision plan)
//   u32 tensor count | directory entries
//   payload
// Directory entry:
//   u16 name length | name | u8 dtype | u8 rank | u32 dims[rank]
//   u64 offset (from payload start) | u64 byte length
//   u8 has_quant [| u8 bits | u32 n | f32 scale[n] | i32 zero_point]
inline constexpr char kContainerMagic[8] = {'T', 'F', 'M', 'L', 'P', 'N', 'E', 'T'};
inline constexpr std::uint32_t kContainerVersion = 1;

struct TensorEntry {
  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::optional<QuantParams> quant;
};

struct ContainerInfo {
  std::uint32_t version = 0;
  nlohmann::json header;
  std::vector<TensorEntry> tensors;
  std::size_t payload_offset = 0;
  std::size_t total_bytes = 0;
  std::size_t payload_bytes = 0;
};

std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);
// Header and directory only; validates structure, not the tensor set.
ContainerInfo read_container_info(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Upper bound on the container size for `cfg` under `preset`. Exact for
// fp32; for calibrated presets only the printed width of header scales and
// zero points varies, and the bound assumes the widest.
std::size_t estimate_container_size(const ModelConfig& cfg, const std::string& preset);

// Axis of a weight tensor holding its output channels.
std::size_t weight_channel_axis(const std::string& name);

}  // namespace tfmlp

#endif  // TFMLP_CORE_CONTAINER_HPP_
