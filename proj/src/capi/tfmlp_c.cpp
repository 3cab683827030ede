// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tfmlp/tfmlp.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/calibrate.hpp"
#include "core/container.hpp"
#include "core/engine.hpp"
#include "core/error.hpp"
#include "core/init.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/plan.hpp"
#include "core/verify.hpp"
#include "core/wav.hpp"
#include "json.hpp"

struct tfmlp_model {
  std::shared_ptr<const tfmlp::Model> model;
};

struct tfmlp_session {
  tfmlp::StreamSession session;
};

namespace {

thread_local std::string g_last_error;

struct ArgumentError {
  std::string message;
};

tfmlp_status status_of(tfmlp::ErrorKind kind) {
  switch (kind) {
    case tfmlp::ErrorKind::kConfig: return TFMLP_ERR_CONFIG;
    case tfmlp::ErrorKind::kNumeric: return TFMLP_ERR_NUMERIC;
    case tfmlp::ErrorKind::kFraming: return TFMLP_ERR_FRAMING;
    case tfmlp::ErrorKind::kFormat: return TFMLP_ERR_FORMAT;
    case tfmlp::ErrorKind::kSchema: return TFMLP_ERR_SCHEMA;
    case tfmlp::ErrorKind::kDomain: return TFMLP_ERR_DOMAIN;
    case tfmlp::ErrorKind::kInput: return TFMLP_ERR_INPUT;
    case tfmlp::ErrorKind::kIo: return TFMLP_ERR_IO;
  }
  return TFMLP_ERR_INTERNAL;
}

template <typename Fn>
tfmlp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TFMLP_OK;
  } catch (const ArgumentError& e) {
    g_last_error = e.message;
    return TFMLP_ERR_ARGUMENT;
  } catch (const tfmlp::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TFMLP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TFMLP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return TFMLP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw ArgumentError{std::string(what) + " is null"};
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tfmlp::ModelConfig parse_config(const char* json) {
  if (json == nullptr) return tfmlp::ModelConfig::separation();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    tfmlp::raise(tfmlp::ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  tfmlp::ModelConfig cfg = tfmlp::config_from_json(doc);
  cfg.validate();
  return cfg;
}

tfmlp_model* wrap(tfmlp::Model&& m) {
  return new tfmlp_model{std::make_shared<const tfmlp::Model>(std::move(m))};
}

void copy_out(const tfmlp::Tensor& t, float* out, std::size_t capacity) {
  need(out, "output buffer");
  if (capacity < t.size()) {
    throw ArgumentError{"output buffer holds " + std::to_string(capacity) + " samples, need " +
                        std::to_string(t.size())};
  }
  std::memcpy(out, t.ptr(), t.size() * sizeof(float));
}

}  // namespace

extern "C" {

const char* tfmlp_version(void) { return "0.1.0"; }

const char* tfmlp_status_name(tfmlp_status status) {
  switch (status) {
    case TFMLP_OK: return "ok";
    case TFMLP_ERR_CONFIG: return "config error";
    case TFMLP_ERR_NUMERIC: return "numeric error";
    case TFMLP_ERR_FRAMING: return "framing error";
    case TFMLP_ERR_FORMAT: return "format error";
    case TFMLP_ERR_SCHEMA: return "schema error";
    case TFMLP_ERR_DOMAIN: return "domain error";
    case TFMLP_ERR_INPUT: return "input error";
    case TFMLP_ERR_IO: return "io error";
    case TFMLP_ERR_ARGUMENT: return "invalid argument";
    case TFMLP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* tfmlp_last_error(void) { return g_last_error.c_str(); }

void tfmlp_string_free(char* s) { std::free(s); }
void tfmlp_buffer_free(float* buffer) { std::free(buffer); }

tfmlp_status tfmlp_config_default(int extraction, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    const auto cfg = extraction ? tfmlp::ModelConfig::extraction() : tfmlp::ModelConfig::separation();
    *out_json = dup_string(tfmlp::to_json(cfg).dump(2));
  });
}

size_t tfmlp_preset_count(void) { return tfmlp::preset_names().size(); }

const char* tfmlp_preset_name(size_t index) {
  const auto& names = tfmlp::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

tfmlp_status tfmlp_estimate_size(const char* config_json, const char* preset, size_t* out_bytes) {
  return guarded([&] {
    need(preset, "preset");
    need(out_bytes, "out_bytes");
    *out_bytes = tfmlp::estimate_container_size(parse_config(config_json), preset);
  });
}

tfmlp_status tfmlp_model_init_random(const char* config_json, uint64_t seed, int zero_bias,
                                     tfmlp_model** out) {
  return guarded([&] {
    need(out, "out");
    const tfmlp::ModelConfig cfg = parse_config(config_json);
    tfmlp::InitOptions opts;
    opts.seed = seed;
    opts.zero_bias = zero_bias != 0;
    *out = wrap(tfmlp::Model(cfg, tfmlp::init_random(cfg, opts)));
  });
}

tfmlp_status tfmlp_model_load(const char* path, tfmlp_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(tfmlp::load_model(path));
  });
}

tfmlp_status tfmlp_model_save(const tfmlp_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    tfmlp::save_model(*model->model, path);
  });
}

void tfmlp_model_free(tfmlp_model* model) { delete model; }

tfmlp_status tfmlp_model_quantize(const tfmlp_model* model, const char* preset,
                                  const float* const* audio, const size_t* lengths, size_t count,
                                  const float* embedding, size_t embedding_len,
                                  tfmlp_model** out) {
  return guarded([&] {
    need(model, "model");
    need(preset, "preset");
    need(out, "out");
    if (count > 0) {
      need(audio, "audio");
      need(lengths, "lengths");
    }
    std::vector<std::vector<float>> utterances;
    utterances.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      need(audio[i], "audio entry");
      utterances.emplace_back(audio[i], audio[i] + lengths[i]);
    }
    std::vector<std::vector<float>> embeddings;
    if (embedding != nullptr) embeddings.emplace_back(embedding, embedding + embedding_len);
    *out = wrap(tfmlp::quantize_model(*model->model, preset, utterances, embeddings));
  });
}

tfmlp_status tfmlp_model_info(const tfmlp_model* model, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(out_json, "out_json");
    const tfmlp::Model& m = *model->model;
    nlohmann::ordered_json doc;
    doc["config"] = tfmlp::to_json(m.config());
    doc["preset"] = m.plan().preset;
    doc["param_count"] = m.param_count();
    nlohmann::ordered_json breakdown = nlohmann::ordered_json::object();
    for (const auto& [name, n] : tfmlp::param_breakdown(m.config()).modules) breakdown[name] = n;
    doc["breakdown"] = breakdown;
    nlohmann::ordered_json sizes = nlohmann::ordered_json::object();
    for (const auto& p : tfmlp::preset_names()) {
      sizes[p] = tfmlp::estimate_container_size(m.config(), p);
    }
    doc["estimated_sizes"] = sizes;
    *out_json = dup_string(doc.dump(2));
  });
}

size_t tfmlp_model_param_count(const tfmlp_model* model) {
  return model ? model->model->param_count() : 0;
}
size_t tfmlp_model_sample_rate(const tfmlp_model* model) {
  return model ? model->model->config().sample_rate : 0;
}
size_t tfmlp_model_hop(const tfmlp_model* model) {
  return model ? model->model->config().hop_len : 0;
}
size_t tfmlp_model_outputs(const tfmlp_model* model) {
  return model ? model->model->config().speakers : 0;
}
size_t tfmlp_model_embedding_dim(const tfmlp_model* model) {
  if (model == nullptr || !model->model->config().film) return 0;
  return model->model->config().embed_dim;
}

tfmlp_status tfmlp_session_create(const tfmlp_model* model, tfmlp_session** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = new tfmlp_session{tfmlp::StreamSession(model->model)};
  });
}

void tfmlp_session_free(tfmlp_session* session) { delete session; }

tfmlp_status tfmlp_session_set_embedding(tfmlp_session* session, const float* embedding,
                                         size_t len) {
  return guarded([&] {
    need(session, "session");
    need(embedding, "embedding");
    session->session.set_embedding(std::span<const float>(embedding, len));
  });
}

tfmlp_status tfmlp_session_reset(tfmlp_session* session) {
  return guarded([&] {
    need(session, "session");
    session->session.reset();
  });
}

tfmlp_status tfmlp_session_push(tfmlp_session* session, const float* chunk, size_t len,
                                float* out, size_t out_capacity) {
  return guarded([&] {
    need(session, "session");
    need(chunk, "chunk");
    copy_out(session->session.push_chunk(std::span<const float>(chunk, len)), out, out_capacity);
  });
}

tfmlp_status tfmlp_session_process(tfmlp_session* session, const float* signal, size_t len,
                                   float* out, size_t out_capacity) {
  return guarded([&] {
    need(session, "session");
    need(signal, "signal");
    copy_out(session->session.process(std::span<const float>(signal, len)), out, out_capacity);
  });
}

tfmlp_status tfmlp_profile(const tfmlp_model* model, double seconds, size_t warmup,
                           uint64_t seed, int as_json, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const tfmlp::ProfileReport report = tfmlp::profile(*model->model, seconds, warmup, seed);
    *out = dup_string(as_json ? report.to_json().dump(2) : report.to_text());
  });
}

tfmlp_status tfmlp_compare_runtime(const char* config_json, size_t chunks, uint64_t seed,
                                   char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    const auto result = tfmlp::compare_runtime(parse_config(config_json), chunks, seed);
    *out_json = dup_string(result.to_json().dump(2));
  });
}

tfmlp_status tfmlp_verify(uint64_t seed, tfmlp_verify_callback callback, void* user,
                          int* all_passed) {
  return guarded([&] {
    need(all_passed, "all_passed");
    const auto results = tfmlp::run_verify(seed, [&](const tfmlp::SuiteResult& r) {
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    });
    *all_passed = 1;
    for (const auto& r : results) {
      if (!r.passed) *all_passed = 0;
    }
  });
}

tfmlp_status tfmlp_wav_read(const char* path, float** samples, size_t* frames, size_t* channels,
                            size_t* sample_rate) {
  return guarded([&] {
    need(path, "path");
    need(samples, "samples");
    need(frames, "frames");
    need(channels, "channels");
    need(sample_rate, "sample_rate");
    const tfmlp::AudioFile file = tfmlp::read_wav(path);
    float* buffer = static_cast<float*>(std::malloc(std::max<size_t>(1, file.samples.size()) *
                                                    sizeof(float)));
    if (buffer == nullptr) throw std::bad_alloc();
    if (!file.samples.empty()) {
      std::memcpy(buffer, file.samples.data(), file.samples.size() * sizeof(float));
    }
    *samples = buffer;
    *frames = file.frames();
    *channels = file.channels;
    *sample_rate = file.sample_rate;
  });
}

tfmlp_status tfmlp_wav_write(const char* path, const float* samples, size_t frames,
                             size_t channels, size_t sample_rate, int float32) {
  return guarded([&] {
    need(path, "path");
    if (frames > 0) need(samples, "samples");
    tfmlp::write_wav(path, std::span<const float>(samples, frames * channels), sample_rate,
                     channels, float32 ? tfmlp::SampleFormat::kFloat32 : tfmlp::SampleFormat::kPcm16);
  });
}

tfmlp_status tfmlp_si_sdr(const float* reference, const float* estimate, size_t len,
                          double* out_db) {
  return guarded([&] {
    need(reference, "reference");
    need(estimate, "estimate");
    need(out_db, "out_db");
    *out_db = tfmlp::si_sdr(std::span<const float>(reference, len),
                            std::span<const float>(estimate, len));
  });
}

}  // extern "C"
