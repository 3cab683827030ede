// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/config.hpp"

#include <cmath>
#include <set>

namespace tfmlp {

ModelConfig ModelConfig::separation() { return ModelConfig{}; }

ModelConfig ModelConfig::extraction() {
  ModelConfig cfg;
  cfg.speakers = 1;
  cfg.film = true;
  return cfg;
}

namespace {

std::size_t expanded(double ratio, std::size_t width) {
  const double h = std::round(ratio * static_cast<double>(width));
  return h < 1.0 ? 1 : static_cast<std::size_t>(h);
}

}  // namespace

std::size_t ModelConfig::token_hidden() const { return expanded(mixer_expansion, block_bins()); }
std::size_t ModelConfig::channel_hidden() const { return expanded(mixer_expansion, channels); }

FrameConfig ModelConfig::frame_config() const {
  return FrameConfig::make(sample_rate, win_len, hop_len, fft_size);
}

void ModelConfig::validate() const {
  require(blocks >= 1, "blocks must be >= 1");
  require(mixer_repeats >= 1, "mixer_repeats must be >= 1");
  require(channels >= 1, "channels must be >= 1");
  require(hidden >= 1, "hidden must be >= 1");
  require(speakers == 1 || speakers == 2, "speakers must be 1 or 2");
  require(compression == 1 || compression == 2 || compression == 4 || compression == 6,
          "compression must be one of 1, 2, 4, 6");
  require(std::isfinite(mixer_expansion) && mixer_expansion > 0.0,
          "mixer_expansion must be positive");
  require(!film || embed_dim >= 1, "embed_dim must be >= 1 when film is enabled");
  require(hop_len >= 1 && hop_len <= win_len && win_len <= fft_size,
          "framing requires 1 <= hop_len <= win_len <= fft_size");
  require(sample_rate > 0, "sample_rate must be positive");
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return nlohmann::json{
      {"blocks", cfg.blocks},
      {"mixer_repeats", cfg.mixer_repeats},
      {"channels", cfg.channels},
      {"hidden", cfg.hidden},
      {"freq_bins", cfg.freq_bins()},
      {"speakers", cfg.speakers},
      {"compression", cfg.compression},
      {"mixer_expansion", cfg.mixer_expansion},
      {"film", cfg.film},
      {"embed_dim", cfg.embed_dim},
      {"sample_rate", cfg.sample_rate},
      {"win_len", cfg.win_len},
      {"hop_len", cfg.hop_len},
      {"fft_size", cfg.fft_size},
      {"gate_order", "ifgo"},
  };
}

ModelConfig config_from_json(const nlohmann::json& doc) {
  require(doc.is_object(), "model config must be a JSON object");
  static const std::set<std::string> known = {
      "blocks",   "mixer_repeats", "channels",    "hidden",   "freq_bins",
      "speakers", "compression",   "mixer_expansion", "film", "embed_dim",
      "sample_rate", "win_len",    "hop_len",     "fft_size", "gate_order"};
  for (const auto& [key, value] : doc.items()) {
    require(known.count(key) > 0, "unknown model config key '" + key + "'");
  }
  ModelConfig cfg;
  try {
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("blocks", cfg.blocks);
    get("mixer_repeats", cfg.mixer_repeats);
    get("channels", cfg.channels);
    get("hidden", cfg.hidden);
    get("speakers", cfg.speakers);
    get("compression", cfg.compression);
    get("mixer_expansion", cfg.mixer_expansion);
    get("film", cfg.film);
    get("embed_dim", cfg.embed_dim);
    get("sample_rate", cfg.sample_rate);
    get("win_len", cfg.win_len);
    get("hop_len", cfg.hop_len);
    get("fft_size", cfg.fft_size);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kConfig, std::string("bad model config value: ") + e.what());
  }
  if (doc.contains("gate_order")) {
    require(doc.at("gate_order") == "ifgo", "only gate order 'ifgo' is supported");
  }
  if (doc.contains("freq_bins")) {
    require(doc.at("freq_bins").get<std::size_t>() == cfg.freq_bins(),
            "freq_bins must equal fft_size / 2 + 1");
  }
  cfg.validate();
  return cfg;
}

}  // namespace tfmlp
