// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_MODEL_HPP_
#define TFMLP_CORE_MODEL_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/dsp.hpp"
#include "core/layers.hpp"
#include "core/plan.hpp"

namespace tfmlp {

// ---------------------------------------------------------------------------
// Parameters

struct DenseParams {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
};

struct ConvParams {
  Tensor weight;
  Tensor bias;
};

struct MixerParams {
  DenseParams tok_fc1;  // [e*F' x F']
  DenseParams tok_fc2;  // [F' x e*F']
  DenseParams ch_fc1;   // [e*C x C]
  DenseParams ch_fc2;   // [C x e*C]
};

// Gate rows are stacked in the order input, forget, candidate, output.
struct LstmParams {
  Tensor wx;    // [4H x C]
  Tensor wh;    // [4H x H]
  Tensor bias;  // [4H]
  DenseParams proj;  // [C x H]
};

struct FilmParams {
  DenseParams gamma;  // [C x E]
  DenseParams beta;   // [C x E]
};

struct BlockParams {
  std::vector<MixerParams> mixers;
  LstmParams lstm;
};

struct ModelParams {
  ConvParams encoder;                // [C, 2, 3, 3]
  std::optional<FilmParams> film;
  std::optional<ConvParams> compress;    // [C, C, alpha]
  std::vector<BlockParams> blocks;
  std::optional<ConvParams> decompress;  // [C_in, C_out, alpha]
  ConvParams decoder;                // [C, 2S, 3, 3]
};

// Zero-filled parameters with the shapes `cfg` requires.
ModelParams zero_params(const ModelConfig& cfg);

// Visits every parameter tensor with its serialized name, in a fixed order.
template <typename Params, typename Fn>
void for_each_param(Params& p, Fn&& fn) {
  fn(std::string("enc.weight"), p.encoder.weight);
  fn(std::string("enc.bias"), p.encoder.bias);
  if (p.film) {
    fn(std::string("film.gamma.weight"), p.film->gamma.weight);
    fn(std::string("film.gamma.bias"), p.film->gamma.bias);
    fn(std::string("film.beta.weight"), p.film->beta.weight);
    fn(std::string("film.beta.bias"), p.film->beta.bias);
  }
  if (p.compress) {
    fn(std::string("compress.weight"), p.compress->weight);
    fn(std::string("compress.bias"), p.compress->bias);
  }
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    auto& blk = p.blocks[b];
    const std::string bn = "blk" + std::to_string(b + 1);
    for (std::size_t m = 0; m < blk.mixers.size(); ++m) {
      auto& mix = blk.mixers[m];
      const std::string mn = bn + ".mix" + std::to_string(m + 1);
      fn(mn + ".tok.fc1.weight", mix.tok_fc1.weight);
      fn(mn + ".tok.fc1.bias", mix.tok_fc1.bias);
      fn(mn + ".tok.fc2.weight", mix.tok_fc2.weight);
      fn(mn + ".tok.fc2.bias", mix.tok_fc2.bias);
      fn(mn + ".ch.fc1.weight", mix.ch_fc1.weight);
      fn(mn + ".ch.fc1.bias", mix.ch_fc1.bias);
      fn(mn + ".ch.fc2.weight", mix.ch_fc2.weight);
      fn(mn + ".ch.fc2.bias", mix.ch_fc2.bias);
    }
    fn(bn + ".lstm.wx.weight", blk.lstm.wx);
    fn(bn + ".lstm.wh.weight", blk.lstm.wh);
    fn(bn + ".lstm.bias", blk.lstm.bias);
    fn(bn + ".lstm.proj.weight", blk.lstm.proj.weight);
    fn(bn + ".lstm.proj.bias", blk.lstm.proj.bias);
  }
  if (p.decompress) {
    fn(std::string("decompress.weight"), p.decompress->weight);
    fn(std::string("decompress.bias"), p.decompress->bias);
  }
  fn(std::string("dec.weight"), p.decoder.weight);
  fn(std::string("dec.bias"), p.decoder.bias);
}

// (name, shape) of every parameter `cfg` requires, in serialization order.
std::vector<std::pair<std::string, Shape>> param_schema(const ModelConfig& cfg);
// Throws a schema error naming the first missing, extra or misshapen tensor.
void check_params(const ModelConfig& cfg, const ModelParams& params);

struct ParamBreakdown {
  std::vector<std::pair<std::string, std::size_t>> modules;
  std::size_t total = 0;
};

std::size_t param_count(const ModelConfig& cfg);
ParamBreakdown param_breakdown(const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Stand-alone float operations on explicit parameters.

// frame: [2 x F x T], history: [2 x F x 2] -> latent [C x F x T].
Tensor encode(const Tensor& frame, const ConvParams& params, Tensor& history);
// latent: [C x F x T].
Tensor film_apply(const Tensor& latent, std::span<const float> embedding,
                  const FilmParams& params);
// Identity when alpha == 1.
Tensor freq_compress(const Tensor& latent, std::size_t alpha, const ConvParams* params);
Tensor freq_decompress(const Tensor& latent, std::size_t alpha, const ConvParams* params,
                       std::size_t out_bins);
// latent: [C x F' x T].
Tensor mixer_forward(const Tensor& latent, std::span<const MixerParams> reps);
// latent: [C x F'] -> [C x F'].
Tensor conv_batched_lstm_step(const Tensor& latent, const LstmParams& params, LstmState& state);
// Per-bin textbook LSTM cell; returns the new hidden state [H x F'].
Tensor reference_batched_lstm_step(const Tensor& inputs, const LstmParams& params,
                                   LstmState& state);
// latent: [C x F x T], history: [C x F x 2] -> [2S x F x T].
Tensor decode(const Tensor& latent, const ConvParams& params, Tensor& history);

// Layer builders shared by Model and the stand-alone operations.
AffineLayer encoder_layer(const ConvParams& p);
AffineLayer decoder_layer(const ConvParams& p);
AffineLayer compress_layer(const ConvParams& p);
AffineLayer decompress_layer(const ConvParams& p);
MixerLayers mixer_layers(const MixerParams& p, const std::string& prefix);
LstmLayers lstm_layers(const LstmParams& p, const std::string& prefix);

// ---------------------------------------------------------------------------
// Streaming model

struct StreamState {
  StftState stft;
  Tensor enc_history;  // [2 x F x 2]
  Tensor dec_history;  // [C x F x 2]
  std::vector<LstmState> lstm;
  Tensor film_gamma;   // [C], empty until an embedding is set
  Tensor film_beta;
  std::size_t chunks = 0;
};

// Immutable after construction; share across threads, one StreamState per
// stream.
class Model {
 public:
  Model(ModelConfig cfg, ModelParams params);
  Model(ModelConfig cfg, ModelParams params, PrecisionPlan plan);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ModelParams& params() const noexcept { return params_; }
  const PrecisionPlan& plan() const noexcept { return plan_; }
  const FrameConfig& frame() const noexcept { return frame_; }
  std::size_t param_count() const { return tfmlp::param_count(cfg_); }

  // Every affine layer in execution order.
  std::vector<const AffineLayer*> layers() const;

  StreamState make_state() const;
  // Computes the FiLM coefficients for `state`. Configuration error when
  // FiLM is disabled.
  void set_embedding(StreamState& state, std::span<const float> embedding,
                     const ForwardHooks& hooks = {}) const;

  // One hop of mono audio -> [S x hop].
  Tensor forward_chunk(std::span<const float> chunk, StreamState& state,
                       const ForwardHooks& hooks = {}) const;
  // Whole signal with all frames computed jointly per layer; the length is
  // truncated to whole hops. Returns [S x T*hop].
  Tensor forward_offline(std::span<const float> signal, std::span<const float> embedding = {},
                         const ForwardHooks& hooks = {}) const;
  // Spectral frames [2 x F x T] -> [2S x F x T], threading `state` histories.
  Tensor forward_frames(const Tensor& frames, StreamState& state,
                        const ForwardHooks& hooks = {}) const;

 private:
  void compile();

  ModelConfig cfg_;
  ModelParams params_;
  PrecisionPlan plan_;
  FrameConfig frame_;

  AffineLayer enc_;
  std::optional<AffineLayer> film_gamma_, film_beta_;
  Edge film_out_;
  std::optional<AffineLayer> compress_, decompress_;
  struct Block {
    std::vector<MixerLayers> mixers;
    LstmLayers lstm;
  };
  std::vector<Block> blocks_;
  AffineLayer dec_;
};

}  // namespace tfmlp

#endif  // TFMLP_CORE_MODEL_HPP_
