// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// C interface to the tfmlp streaming separation engine.
//
// Every function returning tfmlp_status leaves a message for the calling
// thread in tfmlp_last_error() when it fails. Strings returned through
// `char**` out-parameters are owned by the caller and released with
// tfmlp_string_free; sample buffers with tfmlp_buffer_free.

#ifndef TFMLP_TFMLP_H_
#define TFMLP_TFMLP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TFMLP_BUILDING_LIBRARY)
#define TFMLP_API __declspec(dllexport)
#else
#define TFMLP_API __declspec(dllimport)
#endif
#else
#define TFMLP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tfmlp_status {
  TFMLP_OK = 0,
  TFMLP_ERR_CONFIG = 1,
  TFMLP_ERR_NUMERIC = 2,
  TFMLP_ERR_FRAMING = 3,
  TFMLP_ERR_FORMAT = 4,
  TFMLP_ERR_SCHEMA = 5,
  TFMLP_ERR_DOMAIN = 6,
  TFMLP_ERR_INPUT = 7,
  TFMLP_ERR_IO = 8,
  TFMLP_ERR_ARGUMENT = 9,  // null handle or pointer, zero capacity
  TFMLP_ERR_INTERNAL = 10
} tfmlp_status;

typedef struct tfmlp_model tfmlp_model;
typedef struct tfmlp_session tfmlp_session;

TFMLP_API const char* tfmlp_version(void);
TFMLP_API const char* tfmlp_status_name(tfmlp_status status);
// Message of the calling thread's most recent failure; "" if none.
TFMLP_API const char* tfmlp_last_error(void);

TFMLP_API void tfmlp_string_free(char* s);
TFMLP_API void tfmlp_buffer_free(float* buffer);

/* Configuration and presets */

// Default configuration as JSON; extraction != 0 selects the conditioned
// single-output model.
TFMLP_API tfmlp_status tfmlp_config_default(int extraction, char** out_json);
TFMLP_API size_t tfmlp_preset_count(void);
// NULL when index is out of range.
TFMLP_API const char* tfmlp_preset_name(size_t index);
// Upper bound on the container size for a configuration under a preset;
// exact for fp32.
TFMLP_API tfmlp_status tfmlp_estimate_size(const char* config_json, const char* preset,
                                           size_t* out_bytes);

/* Models */

// config_json may be NULL for the default separation model.
TFMLP_API tfmlp_status tfmlp_model_init_random(const char* config_json, uint64_t seed,
                                               int zero_bias, tfmlp_model** out);
TFMLP_API tfmlp_status tfmlp_model_load(const char* path, tfmlp_model** out);
TFMLP_API tfmlp_status tfmlp_model_save(const tfmlp_model* model, const char* path);
TFMLP_API void tfmlp_model_free(tfmlp_model* model);

// Post-training calibration of `model` under `preset` over `count`
// utterances. `embedding` (may be NULL) conditions extraction models during
// calibration.
TFMLP_API tfmlp_status tfmlp_model_quantize(const tfmlp_model* model, const char* preset,
                                            const float* const* audio, const size_t* lengths,
                                            size_t count, const float* embedding,
                                            size_t embedding_len, tfmlp_model** out);

// {"config", "preset", "param_count", "breakdown", "estimated_sizes"}.
TFMLP_API tfmlp_status tfmlp_model_info(const tfmlp_model* model, char** out_json);
TFMLP_API size_t tfmlp_model_param_count(const tfmlp_model* model);
TFMLP_API size_t tfmlp_model_sample_rate(const tfmlp_model* model);
TFMLP_API size_t tfmlp_model_hop(const tfmlp_model* model);
TFMLP_API size_t tfmlp_model_outputs(const tfmlp_model* model);
// 0 for models without speaker conditioning.
TFMLP_API size_t tfmlp_model_embedding_dim(const tfmlp_model* model);

/* Streaming sessions */

// The session keeps its own reference; the model may be freed first.
TFMLP_API tfmlp_status tfmlp_session_create(const tfmlp_model* model, tfmlp_session** out);
TFMLP_API void tfmlp_session_free(tfmlp_session* session);
TFMLP_API tfmlp_status tfmlp_session_set_embedding(tfmlp_session* session,
                                                   const float* embedding, size_t len);
TFMLP_API tfmlp_status tfmlp_session_reset(tfmlp_session* session);
// One hop of samples in; outputs x hop samples out, row-major by output.
TFMLP_API tfmlp_status tfmlp_session_push(tfmlp_session* session, const float* chunk,
                                          size_t len, float* out, size_t out_capacity);
// Whole signal with the reconstruction delay removed; outputs x len
// samples out, row-major by output.
TFMLP_API tfmlp_status tfmlp_session_process(tfmlp_session* session, const float* signal,
                                             size_t len, float* out, size_t out_capacity);

/* Tools */

// Per-stage timing over `seconds` of noise; JSON when as_json != 0,
// otherwise a text table.
TFMLP_API tfmlp_status tfmlp_profile(const tfmlp_model* model, double seconds, size_t warmup,
                                     uint64_t seed, int as_json, char** out);
// Mixer vs bidirectional LSTM and conv-batched vs sequential LSTM medians.
TFMLP_API tfmlp_status tfmlp_compare_runtime(const char* config_json, size_t chunks,
                                             uint64_t seed, char** out_json);

typedef void (*tfmlp_verify_callback)(const char* suite, int passed, const char* detail,
                                      void* user);
// Runs the built-in self-checks; *all_passed is 1 when every suite passes.
TFMLP_API tfmlp_status tfmlp_verify(uint64_t seed, tfmlp_verify_callback callback, void* user,
                                    int* all_passed);

// Interleaved samples; release with tfmlp_buffer_free.
TFMLP_API tfmlp_status tfmlp_wav_read(const char* path, float** samples, size_t* frames,
                                      size_t* channels, size_t* sample_rate);
// float32 != 0 writes IEEE float samples, otherwise 16-bit PCM.
TFMLP_API tfmlp_status tfmlp_wav_write(const char* path, const float* samples, size_t frames,
                                       size_t channels, size_t sample_rate, int float32);

TFMLP_API tfmlp_status tfmlp_si_sdr(const float* reference, const float* estimate, size_t len,
                                    double* out_db);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // TFMLP_TFMLP_H_
