// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "core/signals.hpp"

namespace tfmlp {

StreamSession::StreamSession(std::shared_ptr<const Model> model) : model_(std::move(model)) {
  require(model_ != nullptr, "session needs a model");
  state_ = model_->make_state();
}

void StreamSession::set_embedding(std::span<const float> embedding) {
  model_->set_embedding(state_, embedding);
  embedding_.assign(embedding.begin(), embedding.end());
}

Tensor StreamSession::push_chunk(std::span<const float> chunk, StageTimes* times) {
  if (chunk.size() != hop()) {
    raise(ErrorKind::kFraming, "chunk must have exactly " + std::to_string(hop()) +
                                   " samples, got " + std::to_string(chunk.size()));
  }
  for (float v : chunk) {
    if (!std::isfinite(v)) raise(ErrorKind::kInput, "input chunk contains non-finite samples");
  }
  if (model_->config().film && state_.film_gamma.empty()) {
    raise(ErrorKind::kConfig, "extraction model needs an embedding before audio");
  }
  ForwardHooks hooks;
  hooks.times = times;
  return model_->forward_chunk(chunk, state_, hooks);
}

void StreamSession::reset() {
  state_ = model_->make_state();
  if (!embedding_.empty()) model_->set_embedding(state_, embedding_);
}

Tensor StreamSession::process(std::span<const float> signal) {
  const std::size_t hop_len = hop(), S = outputs();
  const std::size_t delay = model_->frame().reconstruction_delay();
  const std::size_t needed = signal.size() + delay;
  const std::size_t chunks = (needed + hop_len - 1) / hop_len;
  std::vector<float> padded(chunks * hop_len, 0.0f);
  std::copy(signal.begin(), signal.end(), padded.begin());

  Tensor out({S, std::max<std::size_t>(signal.size(), 1)});
  std::size_t produced = 0;  // samples of the delayed stream seen so far
  for (std::size_t c = 0; c < chunks; ++c) {
    const Tensor y = push_chunk(std::span<const float>(padded).subspan(c * hop_len, hop_len));
    for (std::size_t n = 0; n < hop_len; ++n, ++produced) {
      if (produced < delay) continue;
      const std::size_t pos = produced - delay;
      if (pos >= signal.size()) continue;
      for (std::size_t s = 0; s < S; ++s) out[s * out.dim(1) + pos] = y[s * hop_len + n];
    }
  }
  return out;
}

std::vector<Stage> active_stages(const ModelConfig& cfg) {
  std::vector<Stage> stages = {Stage::kStft, Stage::kEncoder};
  if (cfg.film) stages.push_back(Stage::kFilm);
  if (cfg.compression > 1) stages.push_back(Stage::kCompress);
  stages.push_back(Stage::kMixer);
  stages.push_back(Stage::kLstm);
  if (cfg.compression > 1) stages.push_back(Stage::kDecompress);
  stages.push_back(Stage::kDecoder);
  stages.push_back(Stage::kIstft);
  return stages;
}

namespace {

StageStats summarize(std::string name, std::vector<double> seconds) {
  StageStats s;
  s.name = std::move(name);
  if (seconds.empty()) return s;
  double sum = 0.0;
  for (double v : seconds) sum += v;
  s.mean_ms = 1e3 * sum / static_cast<double>(seconds.size());
  std::sort(seconds.begin(), seconds.end());
  auto quantile = [&](double q) {
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(seconds.size())) - 1.0);
    return 1e3 * seconds[std::min(idx, seconds.size() - 1)];
  };
  s.p50_ms = quantile(0.5);
  s.p95_ms = quantile(0.95);
  return s;
}

nlohmann::json stats_json(const StageStats& s) {
  return {{"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms}, {"p95_ms", s.p95_ms}};
}

}  // namespace

ProfileReport profile(const Model& model, double seconds, std::size_t warmup, std::uint64_t seed,
                      std::span<const float> embedding) {
  require(seconds >= 1.0, "profile needs at least 1 s of audio");
  const ModelConfig& cfg = model.config();
  const std::size_t hop_len = cfg.hop_len;
  const std::size_t timed = static_cast<std::size_t>(
      std::ceil(seconds * static_cast<double>(cfg.sample_rate) / static_cast<double>(hop_len)));
  const std::vector<float> audio = white_noise((timed + warmup) * hop_len, seed, 0.1f);

  // Aliasing shared_ptr: the session borrows the caller's model.
  StreamSession session(std::shared_ptr<const Model>(std::shared_ptr<const Model>(), &model));
  if (cfg.film) {
    if (embedding.empty()) {
      session.set_embedding(random_embedding(cfg.embed_dim, seed));
    } else {
      session.set_embedding(embedding);
    }
  }

  const std::vector<Stage> stages = active_stages(cfg);
  std::vector<std::vector<double>> per_stage(kStageCount);
  std::vector<double> totals;
  totals.reserve(timed);
  for (std::size_t c = 0; c < timed + warmup; ++c) {
    StageTimes times;
    const auto start = std::chrono::steady_clock::now();
    session.push_chunk(std::span<const float>(audio).subspan(c * hop_len, hop_len), &times);
    const auto end = std::chrono::steady_clock::now();
    if (c < warmup) continue;
    totals.push_back(std::chrono::duration<double>(end - start).count());
    for (Stage s : stages) per_stage[static_cast<std::size_t>(s)].push_back(times[s]);
  }

  ProfileReport report;
  report.preset = model.plan().preset;
  report.param_count = model.param_count();
  report.chunks = timed;
  report.warmup_chunks = warmup;
  report.chunk_ms = 1e3 * cfg.frame_config().hop_seconds();
  double stage_sum = 0.0;
  for (Stage s : stages) {
    report.stages.push_back(summarize(to_string(s), per_stage[static_cast<std::size_t>(s)]));
    stage_sum += report.stages.back().mean_ms;
  }
  report.total = summarize("total", totals);
  report.overhead_ms = report.total.mean_ms - stage_sum;
  report.rtf = report.total.mean_ms / report.chunk_ms;
  return report;
}

std::string ProfileReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "preset        " << preset << "\n";
  out << "params        " << param_count << "\n";
  out << "chunks        " << chunks << " (+" << warmup_chunks << " warmup)\n";
  out << "chunk_ms      " << chunk_ms << "\n";
  out << std::left << std::setw(14) << "stage" << std::right << std::setw(10) << "mean_ms"
      << std::setw(10) << "p50_ms" << std::setw(10) << "p95_ms" << "\n";
  auto row = [&](const StageStats& s) {
    out << std::left << std::setw(14) << s.name << std::right << std::setw(10) << s.mean_ms
        << std::setw(10) << s.p50_ms << std::setw(10) << s.p95_ms << "\n";
  };
  for (const StageStats& s : stages) row(s);
  row(total);
  out << "overhead_ms   " << overhead_ms << "\n";
  out << "rtf           " << rtf << "\n";
  return out.str();
}

nlohmann::json ProfileReport::to_json() const {
  nlohmann::json st = nlohmann::json::object();
  for (const StageStats& s : stages) st[s.name] = stats_json(s);
  return {{"preset", preset},
          {"param_count", param_count},
          {"chunks", chunks},
          {"warmup_chunks", warmup_chunks},
          {"chunk_ms", chunk_ms},
          {"stages", st},
          {"stage_order", [&] {
             std::vector<std::string> names;
             for (const StageStats& s : stages) names.push_back(s.name);
             return names;
           }()},
          {"total", stats_json(total)},
          {"overhead_ms", overhead_ms},
          {"rtf", rtf}};
}

}  // namespace tfmlp
