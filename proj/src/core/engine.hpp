// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_ENGINE_HPP_
#define TFMLP_CORE_ENGINE_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "json.hpp"

namespace tfmlp {

// One stream over a shared, immutable model.
class StreamSession {
 public:
  explicit StreamSession(std::shared_ptr<const Model> model);

  const Model& model() const noexcept { return *model_; }
  std::size_t chunks() const noexcept { return state_.chunks; }
  std::size_t hop() const noexcept { return model_->config().hop_len; }
  std::size_t outputs() const noexcept { return model_->config().speakers; }

  // Required before the first chunk on extraction models; kept across reset().
  void set_embedding(std::span<const float> embedding);

  // Exactly one hop of mono samples -> [S x hop]. Framing error on a wrong
  // length, input error on non-finite samples.
  Tensor push_chunk(std::span<const float> chunk, StageTimes* times = nullptr);

  // Back to the initial state; the next outputs repeat a fresh session's.
  void reset();

  // Whole signal through push_chunk, with the reconstruction delay removed
  // so that output sample n lines up with input sample n. Returns
  // [S x signal.size()].
  Tensor process(std::span<const float> signal);

 private:
  std::shared_ptr<const Model> model_;
  StreamState state_;
  std::vector<float> embedding_;
};

struct StageStats {
  std::string name;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

struct ProfileReport {
  std::string preset;
  std::size_t param_count = 0;
  std::size_t chunks = 0;         // timed chunks
  std::size_t warmup_chunks = 0;  // excluded from the statistics
  double chunk_ms = 0.0;          // audio duration of one chunk
  std::vector<StageStats> stages;
  StageStats total;
  double overhead_ms = 0.0;  // mean total minus the sum of stage means
  double rtf = 0.0;          // mean total / chunk duration

  std::string to_text() const;
  nlohmann::json to_json() const;
};

// Times every stage of forward_chunk over `seconds` of seeded noise.
ProfileReport profile(const Model& model, double seconds, std::size_t warmup = 10,
                      std::uint64_t seed = 0, std::span<const float> embedding = {});

// Stage names present in `cfg`'s forward pass, in execution order.
std::vector<Stage> active_stages(const ModelConfig& cfg);

}  // namespace tfmlp

#endif  // TFMLP_CORE_ENGINE_HPP_
