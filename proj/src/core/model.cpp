// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/model.hpp"

#include <cmath>

namespace tfmlp {

namespace {

constexpr std::size_t kKernel = 3;  // encoder/decoder kernel, both axes

DenseParams dense(std::size_t out, std::size_t in) {
  return DenseParams{Tensor({out, in}), Tensor({out})};
}

std::vector<float> copy_of(const Tensor& t) { return t.storage(); }

}  // namespace

ModelParams zero_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t C = cfg.channels, H = cfg.hidden, S = cfg.speakers;
  const std::size_t Fb = cfg.block_bins(), Ht = cfg.token_hidden(), Hc = cfg.channel_hidden();
  ModelParams p;
  p.encoder = {Tensor({C, 2, kKernel, kKernel}), Tensor({C})};
  if (cfg.film) p.film = FilmParams{dense(C, cfg.embed_dim), dense(C, cfg.embed_dim)};
  if (cfg.compression > 1) {
    p.compress = ConvParams{Tensor({C, C, cfg.compression}), Tensor({C})};
    p.decompress = ConvParams{Tensor({C, C, cfg.compression}), Tensor({C})};
  }
  p.blocks.resize(cfg.blocks);
  for (BlockParams& blk : p.blocks) {
    blk.mixers.resize(cfg.mixer_repeats);
    for (MixerParams& mix : blk.mixers) {
      mix.tok_fc1 = dense(Ht, Fb);
      mix.tok_fc2 = dense(Fb, Ht);
      mix.ch_fc1 = dense(Hc, C);
      mix.ch_fc2 = dense(C, Hc);
    }
    blk.lstm.wx = Tensor({4 * H, C});
    blk.lstm.wh = Tensor({4 * H, H});
    blk.lstm.bias = Tensor({4 * H});
    blk.lstm.proj = dense(C, H);
  }
  p.decoder = {Tensor({C, 2 * S, kKernel, kKernel}), Tensor({2 * S})};
  return p;
}

std::vector<std::pair<std::string, Shape>> param_schema(const ModelConfig& cfg) {
  std::vector<std::pair<std::string, Shape>> schema;
  const ModelParams p = zero_params(cfg);
  for_each_param(p, [&](const std::string& name, const Tensor& t) {
    schema.emplace_back(name, t.shape());
  });
  return schema;
}

void check_params(const ModelConfig& cfg, const ModelParams& params) {
  const auto schema = param_schema(cfg);
  std::vector<std::pair<std::string, Shape>> have;
  for_each_param(params, [&](const std::string& name, const Tensor& t) {
    have.emplace_back(name, t.shape());
  });
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i >= have.size() || have[i].first != schema[i].first) {
      raise(ErrorKind::kSchema, "missing parameter tensor " + schema[i].first);
    }
    if (have[i].second != schema[i].second) {
      raise(ErrorKind::kSchema, "parameter " + schema[i].first + " has shape " +
                                    shape_string(have[i].second) + ", expected " +
                                    shape_string(schema[i].second));
    }
  }
  if (have.size() > schema.size()) {
    raise(ErrorKind::kSchema, "unexpected parameter tensor " + have[schema.size()].first);
  }
}

std::size_t param_count(const ModelConfig& cfg) { return param_breakdown(cfg).total; }

ParamBreakdown param_breakdown(const ModelConfig& cfg) {
  static const std::vector<std::string> order = {"encoder", "film",       "compress", "mixer",
                                                 "lstm",    "decompress", "decoder"};
  std::vector<std::size_t> counts(order.size(), 0);
  for (const auto& [name, shape] : param_schema(cfg)) {
    std::size_t slot = 0;
    if (name.starts_with("enc.")) slot = 0;
    else if (name.starts_with("film.")) slot = 1;
    else if (name.starts_with("compress.")) slot = 2;
    else if (name.find(".mix") != std::string::npos) slot = 3;
    else if (name.find(".lstm.") != std::string::npos) slot = 4;
    else if (name.starts_with("decompress.")) slot = 5;
    else slot = 6;
    counts[slot] += shape_numel(shape);
  }
  ParamBreakdown out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (counts[i] == 0) continue;
    out.modules.emplace_back(order[i], counts[i]);
    out.total += counts[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer builders

AffineLayer encoder_layer(const ConvParams& p) {
  require(p.weight.rank() == 4 && p.weight.dim(2) == kKernel && p.weight.dim(3) == kKernel,
          "encoder weight must be [C, C_in, 3, 3]");
  const std::size_t out = p.weight.dim(0);
  return make_affine("enc", copy_of(p.weight), out, p.weight.size() / out, copy_of(p.bias));
}

AffineLayer decoder_layer(const ConvParams& p) {
  require(p.weight.rank() == 4 && p.weight.dim(2) == kKernel && p.weight.dim(3) == kKernel,
          "decoder weight must be [C_in, C_out, 3, 3]");
  const std::size_t in = p.weight.dim(0), out = p.weight.dim(1), taps = kKernel * kKernel;
  std::vector<float> w(out * in * taps);
  for (std::size_t i = 0; i < in; ++i)
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t k = 0; k < taps; ++k)
        w[o * in * taps + i * taps + k] = p.weight[(i * out + o) * taps + k];
  return make_affine("dec", std::move(w), out, in * taps, copy_of(p.bias));
}

AffineLayer compress_layer(const ConvParams& p) {
  require(p.weight.rank() == 3, "compress weight must be [C_out, C_in, alpha]");
  const std::size_t out = p.weight.dim(0);
  return make_affine("compress", copy_of(p.weight), out, p.weight.size() / out, copy_of(p.bias));
}

AffineLayer decompress_layer(const ConvParams& p) {
  require(p.weight.rank() == 3, "decompress weight must be [C_in, C_out, alpha]");
  const std::size_t in = p.weight.dim(0), out = p.weight.dim(1), alpha = p.weight.dim(2);
  // Row k*C_out + o produces output bin j*alpha + k of channel o.
  std::vector<float> w(alpha * out * in);
  std::vector<float> bias(alpha * out);
  std::vector<std::size_t> channel(alpha * out);
  for (std::size_t k = 0; k < alpha; ++k) {
    for (std::size_t o = 0; o < out; ++o) {
      const std::size_t r = k * out + o;
      bias[r] = p.bias[o];
      channel[r] = o;
      for (std::size_t i = 0; i < in; ++i) w[r * in + i] = p.weight[(i * out + o) * alpha + k];
    }
  }
  return make_affine("decompress", std::move(w), alpha * out, in, std::move(bias), false,
                     std::move(channel));
}

MixerLayers mixer_layers(const MixerParams& p, const std::string& prefix) {
  auto layer = [&](const DenseParams& d, const char* part, bool relu) {
    return make_affine(prefix + part, copy_of(d.weight), d.weight.dim(0), d.weight.dim(1),
                       copy_of(d.bias), relu);
  };
  MixerLayers m;
  m.tok_fc1 = layer(p.tok_fc1, ".tok.fc1", true);
  m.tok_fc2 = layer(p.tok_fc2, ".tok.fc2", false);
  m.ch_fc1 = layer(p.ch_fc1, ".ch.fc1", true);
  m.ch_fc2 = layer(p.ch_fc2, ".ch.fc2", false);
  m.tok_res.name = prefix + ".tok.res";
  m.ch_res.name = prefix + ".ch.res";
  return m;
}

LstmLayers lstm_layers(const LstmParams& p, const std::string& prefix) {
  require(p.wx.rank() == 2 && p.wh.rank() == 2 && p.wx.dim(0) % 4 == 0 &&
              p.wh.dim(0) == p.wx.dim(0) && p.wh.dim(1) * 4 == p.wh.dim(0),
          "LSTM weights must be [4H x C] and [4H x H]");
  LstmLayers l;
  l.hidden = p.wh.dim(1);
  l.wx = make_affine(prefix + ".wx", copy_of(p.wx), p.wx.dim(0), p.wx.dim(1), copy_of(p.bias));
  l.wh = make_affine(prefix + ".wh", copy_of(p.wh), p.wh.dim(0), p.wh.dim(1), {});
  l.proj = make_affine(prefix + ".proj", copy_of(p.proj.weight), p.proj.weight.dim(0),
                       p.proj.weight.dim(1), copy_of(p.proj.bias));
  l.gates.name = prefix + ".gates";
  l.act.name = prefix + ".act";
  l.cell.name = prefix + ".cell";
  l.hidden_state.name = prefix + ".hidden";
  l.res.name = prefix + ".res";
  return l;
}

namespace {

AffineLayer film_layer(const DenseParams& d, const char* name) {
  return make_affine(name, copy_of(d.weight), d.weight.dim(0), d.weight.dim(1), copy_of(d.bias));
}

Tensor as_sequence(const Tensor& x) {
  if (x.rank() == 3) return x;
  require(x.rank() == 2, "latent must be [C x F] or [C x F x T]");
  return x.reshaped({x.dim(0), x.dim(1), 1});
}

void check_history(const Tensor& history, std::size_t channels, std::size_t bins,
                   const char* what) {
  require(history.shape() == Shape({channels, bins, kKernel - 1}),
          std::string(what) + " history must be " +
              shape_string({channels, bins, kKernel - 1}) + ", got " +
              shape_string(history.shape()));
}

Tensor run_encoder(const AffineLayer& layer, const Tensor& frames, Tensor& history,
                   const ForwardHooks& hooks) {
  require(frames.rank() == 3 && layer.cols == frames.dim(0) * kKernel * kKernel,
          "encoder input must be [" + std::to_string(layer.cols / (kKernel * kKernel)) +
              " x F x T], got " + shape_string(frames.shape()));
  const std::size_t F = frames.dim(1), T = frames.dim(2);
  check_history(history, frames.dim(0), F, "encoder");
  const Tensor cols = im2col_causal(frames, history, kKernel, kKernel);
  history = advance_history(frames, history);
  Tensor out = run_affine(layer, cols.data(), F * T, hooks);
  out.reshape({layer.rows, F, T});
  return out;
}

Tensor run_decoder(const AffineLayer& layer, const Tensor& latent, Tensor& history,
                   const ForwardHooks& hooks) {
  require(latent.rank() == 3 && layer.cols == latent.dim(0) * kKernel * kKernel,
          "decoder input must be [" + std::to_string(layer.cols / (kKernel * kKernel)) +
              " x F x T], got " + shape_string(latent.shape()));
  const std::size_t F = latent.dim(1), T = latent.dim(2);
  check_history(history, latent.dim(0), F, "decoder");
  const Tensor cols = im2col_transposed_causal(latent, history, kKernel, kKernel);
  history = advance_history(latent, history);
  Tensor out = run_affine(layer, cols.data(), F * T, hooks);
  out.reshape({layer.rows, F, T});
  return out;
}

void apply_film(Tensor& x, std::span<const float> gamma, std::span<const float> beta) {
  const std::size_t per = x.size() / x.dim(0);
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    float* row = x.ptr() + c * per;
    for (std::size_t i = 0; i < per; ++i) row[i] = gamma[c] * row[i] + beta[c];
  }
}

Tensor run_compress(const AffineLayer& layer, const Tensor& x, std::size_t alpha,
                    const ForwardHooks& hooks) {
  const std::size_t C = x.dim(0), F = x.dim(1), T = x.dim(2);
  require(layer.cols == C * alpha, "compress input channel mismatch");
  const std::size_t Fc = (F + alpha - 1) / alpha;
  Tensor cols({C * alpha, Fc * T});
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t k = 0; k < alpha; ++k) {
      float* dst = cols.row(i * alpha + k).data();
      for (std::size_t j = 0; j < Fc; ++j) {
        const std::size_t f = j * alpha + k;
        if (f >= F) continue;
        for (std::size_t t = 0; t < T; ++t) dst[j * T + t] = x[(i * F + f) * T + t];
      }
    }
  Tensor out = run_affine(layer, cols.data(), Fc * T, hooks);
  out.reshape({layer.rows, Fc, T});
  return out;
}

Tensor run_decompress(const AffineLayer& layer, const Tensor& x, std::size_t alpha,
                      std::size_t out_bins, const ForwardHooks& hooks) {
  const std::size_t Fc = x.dim(1), T = x.dim(2);
  require(layer.cols == x.dim(0), "decompress input channel mismatch");
  require(out_bins <= Fc * alpha, "decompress cannot produce more than F' * alpha bins");
  const std::size_t C = layer.rows / alpha;
  const Tensor res = run_affine(layer, x.data(), Fc * T, hooks);
  Tensor out({C, out_bins, T});
  for (std::size_t k = 0; k < alpha; ++k)
    for (std::size_t o = 0; o < C; ++o) {
      const float* src = res.row(k * C + o).data();
      for (std::size_t j = 0; j < Fc; ++j) {
        const std::size_t f = j * alpha + k;
        if (f >= out_bins) continue;
        for (std::size_t t = 0; t < T; ++t) out[(o * out_bins + f) * T + t] = src[j * T + t];
      }
    }
  return out;
}

Tensor run_lstm_sequence(const LstmLayers& lstm, const Tensor& x, LstmState& state,
                         const ForwardHooks& hooks) {
  const std::size_t C = x.dim(0), F = x.dim(1), T = x.dim(2);
  if (T == 1) {
    Tensor out = run_lstm_step(lstm, x.reshaped({C, F}), state, hooks);
    out.reshape({C, F, 1});
    return out;
  }
  Tensor out({C, F, T});
  Tensor frame({C, F});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < C * F; ++i) frame[i] = x[i * T + t];
    const Tensor y = run_lstm_step(lstm, frame, state, hooks);
    for (std::size_t i = 0; i < C * F; ++i) out[i * T + t] = y[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stand-alone operations

Tensor encode(const Tensor& frame, const ConvParams& params, Tensor& history) {
  return run_encoder(encoder_layer(params), frame, history, {});
}

Tensor film_apply(const Tensor& latent, std::span<const float> embedding,
                  const FilmParams& params) {
  const AffineLayer gamma = film_layer(params.gamma, "film.gamma");
  const AffineLayer beta = film_layer(params.beta, "film.beta");
  require(embedding.size() == gamma.cols, "embedding must have " + std::to_string(gamma.cols) +
                                              " values, got " + std::to_string(embedding.size()));
  require(latent.rank() >= 2 && latent.dim(0) == gamma.rows, "FiLM channel mismatch");
  check_finite(embedding, "embedding");
  const Tensor g = run_affine(gamma, embedding, 1, {});
  const Tensor b = run_affine(beta, embedding, 1, {});
  Tensor out = latent;
  apply_film(out, g.data(), b.data());
  return out;
}

Tensor freq_compress(const Tensor& latent, std::size_t alpha, const ConvParams* params) {
  if (alpha == 1) return latent;
  require(params != nullptr, "compression parameters required for alpha > 1");
  const Tensor seq = as_sequence(latent);
  Tensor out = run_compress(compress_layer(*params), seq, alpha, {});
  if (latent.rank() == 2) out.reshape({out.dim(0), out.dim(1)});
  return out;
}

Tensor freq_decompress(const Tensor& latent, std::size_t alpha, const ConvParams* params,
                       std::size_t out_bins) {
  if (alpha == 1) return latent;
  require(params != nullptr, "decompression parameters required for alpha > 1");
  const Tensor seq = as_sequence(latent);
  Tensor out = run_decompress(decompress_layer(*params), seq, alpha, out_bins, {});
  if (latent.rank() == 2) out.reshape({out.dim(0), out.dim(1)});
  return out;
}

Tensor mixer_forward(const Tensor& latent, std::span<const MixerParams> reps) {
  std::vector<MixerLayers> layers;
  for (std::size_t m = 0; m < reps.size(); ++m) {
    layers.push_back(mixer_layers(reps[m], "mix" + std::to_string(m + 1)));
  }
  Tensor out = run_mixers(layers, as_sequence(latent), {});
  if (latent.rank() == 2) out.reshape(latent.shape());
  return out;
}

Tensor conv_batched_lstm_step(const Tensor& latent, const LstmParams& params, LstmState& state) {
  return run_lstm_step(lstm_layers(params, "lstm"), latent, state, {});
}

Tensor reference_batched_lstm_step(const Tensor& inputs, const LstmParams& params,
                                   LstmState& state) {
  const std::size_t H = params.wh.dim(1), C = params.wx.dim(1);
  require(inputs.rank() == 2 && inputs.dim(0) == C, "reference LSTM input must be [C x F']");
  const std::size_t F = inputs.dim(1);
  require(state.h.shape() == Shape({H, F}) && state.c.shape() == Shape({H, F}),
          "reference LSTM state shape mismatch");
  auto sig = [](float z) { return 1.0f / (1.0f + std::exp(-z)); };

  Tensor h_next({H, F}), c_next({H, F});
  std::vector<float> x(C), h(H), z(4 * H);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t i = 0; i < C; ++i) x[i] = inputs[i * F + f];
    for (std::size_t j = 0; j < H; ++j) h[j] = state.h[j * F + f];
    for (std::size_t r = 0; r < 4 * H; ++r) {
      float acc = params.bias[r];
      for (std::size_t i = 0; i < C; ++i) acc += params.wx[r * C + i] * x[i];
      for (std::size_t j = 0; j < H; ++j) acc += params.wh[r * H + j] * h[j];
      z[r] = acc;
    }
    for (std::size_t j = 0; j < H; ++j) {
      const float in_gate = sig(z[j]);
      const float forget = sig(z[H + j]);
      const float cand = std::tanh(z[2 * H + j]);
      const float out_gate = sig(z[3 * H + j]);
      const float c = forget * state.c[j * F + f] + in_gate * cand;
      c_next[j * F + f] = c;
      h_next[j * F + f] = out_gate * std::tanh(c);
    }
  }
  state.h = h_next;
  state.c = std::move(c_next);
  return h_next;
}

Tensor decode(const Tensor& latent, const ConvParams& params, Tensor& history) {
  return run_decoder(decoder_layer(params), as_sequence(latent), history, {});
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelConfig cfg, ModelParams params)
    : Model(cfg, std::move(params), make_preset("fp32", cfg)) {}

Model::Model(ModelConfig cfg, ModelParams params, PrecisionPlan plan)
    : cfg_(std::move(cfg)), params_(std::move(params)), plan_(std::move(plan)) {
  cfg_.validate();
  check_params(cfg_, params_);
  plan_.validate(cfg_);
  frame_ = cfg_.frame_config();
  compile();
}

void Model::compile() {
  enc_ = encoder_layer(params_.encoder);
  assign_precision(enc_, plan_);
  if (params_.film) {
    film_gamma_ = film_layer(params_.film->gamma, "film.gamma");
    film_beta_ = film_layer(params_.film->beta, "film.beta");
    assign_precision(*film_gamma_, plan_);
    assign_precision(*film_beta_, plan_);
    film_out_ = Edge{"film.out", plan_.at("film.out")};
  }
  if (params_.compress) {
    compress_ = compress_layer(*params_.compress);
    decompress_ = decompress_layer(*params_.decompress);
    assign_precision(*compress_, plan_);
    assign_precision(*decompress_, plan_);
  }
  blocks_.clear();
  for (std::size_t b = 0; b < params_.blocks.size(); ++b) {
    const std::string bn = "blk" + std::to_string(b + 1);
    Block blk;
    for (std::size_t m = 0; m < params_.blocks[b].mixers.size(); ++m) {
      MixerLayers mix = mixer_layers(params_.blocks[b].mixers[m], bn + ".mix" + std::to_string(m + 1));
      for (AffineLayer* l : {&mix.tok_fc1, &mix.tok_fc2, &mix.ch_fc1, &mix.ch_fc2}) {
        assign_precision(*l, plan_);
      }
      mix.tok_res.assign = plan_.at(mix.tok_res.name);
      mix.ch_res.assign = plan_.at(mix.ch_res.name);
      blk.mixers.push_back(std::move(mix));
    }
    blk.lstm = lstm_layers(params_.blocks[b].lstm, bn + ".lstm");
    for (AffineLayer* l : {&blk.lstm.wx, &blk.lstm.wh, &blk.lstm.proj}) assign_precision(*l, plan_);
    for (Edge* e : {&blk.lstm.gates, &blk.lstm.act, &blk.lstm.cell, &blk.lstm.hidden_state,
                    &blk.lstm.res}) {
      e->assign = plan_.at(e->name);
    }
    blocks_.push_back(std::move(blk));
  }
  dec_ = decoder_layer(params_.decoder);
  assign_precision(dec_, plan_);
}

std::vector<const AffineLayer*> Model::layers() const {
  std::vector<const AffineLayer*> out{&enc_};
  if (film_gamma_) {
    out.push_back(&*film_gamma_);
    out.push_back(&*film_beta_);
  }
  if (compress_) out.push_back(&*compress_);
  for (const Block& blk : blocks_) {
    for (const MixerLayers& m : blk.mixers) {
      out.insert(out.end(), {&m.tok_fc1, &m.tok_fc2, &m.ch_fc1, &m.ch_fc2});
    }
    out.insert(out.end(), {&blk.lstm.wx, &blk.lstm.wh, &blk.lstm.proj});
  }
  if (decompress_) out.push_back(&*decompress_);
  out.push_back(&dec_);
  return out;
}

StreamState Model::make_state() const {
  StreamState s;
  const std::size_t F = cfg_.freq_bins();
  s.stft = StftState::make(frame_, cfg_.speakers);
  s.enc_history = Tensor({2, F, kKernel - 1});
  s.dec_history = Tensor({cfg_.channels, F, kKernel - 1});
  s.lstm.assign(cfg_.blocks, LstmState::zeros(cfg_.hidden, cfg_.block_bins()));
  return s;
}

void Model::set_embedding(StreamState& state, std::span<const float> embedding,
                          const ForwardHooks& hooks) const {
  require(cfg_.film, "this model has no FiLM conditioning; embeddings are not accepted");
  require(embedding.size() == cfg_.embed_dim,
          "embedding must have " + std::to_string(cfg_.embed_dim) + " values, got " +
              std::to_string(embedding.size()));
  check_finite(embedding, "embedding");
  state.film_gamma = run_affine(*film_gamma_, embedding, 1, hooks).reshaped({cfg_.channels});
  state.film_beta = run_affine(*film_beta_, embedding, 1, hooks).reshaped({cfg_.channels});
}

Tensor Model::forward_frames(const Tensor& frames, StreamState& state,
                             const ForwardHooks& hooks) const {
  Tensor x;
  {
    StageScope scope(hooks, Stage::kEncoder);
    x = run_encoder(enc_, frames, state.enc_history, hooks);
  }
  if (cfg_.film) {
    StageScope scope(hooks, Stage::kFilm);
    require(!state.film_gamma.empty(), "extraction model needs an embedding before audio");
    apply_film(x, state.film_gamma.data(), state.film_beta.data());
    apply_edge(film_out_, x.data(), hooks);
  }
  if (compress_) {
    StageScope scope(hooks, Stage::kCompress);
    x = run_compress(*compress_, x, cfg_.compression, hooks);
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    {
      StageScope scope(hooks, Stage::kMixer);
      x = run_mixers(blocks_[b].mixers, x, hooks);
    }
    StageScope scope(hooks, Stage::kLstm);
    x = run_lstm_sequence(blocks_[b].lstm, x, state.lstm[b], hooks);
  }
  if (decompress_) {
    StageScope scope(hooks, Stage::kDecompress);
    x = run_decompress(*decompress_, x, cfg_.compression, cfg_.freq_bins(), hooks);
  }
  StageScope scope(hooks, Stage::kDecoder);
  return run_decoder(dec_, x, state.dec_history, hooks);
}

Tensor Model::forward_chunk(std::span<const float> chunk, StreamState& state,
                            const ForwardHooks& hooks) const {
  Tensor frame;
  {
    StageScope scope(hooks, Stage::kStft);
    frame = stft_step(chunk, state.stft, frame_);
  }
  const Tensor out = forward_frames(frame, state, hooks);
  StageScope scope(hooks, Stage::kIstft);
  Tensor audio = istft_step(out, state.stft, frame_);
  ++state.chunks;
  return audio;
}

Tensor Model::forward_offline(std::span<const float> signal, std::span<const float> embedding,
                              const ForwardHooks& hooks) const {
  check_finite(signal, "input audio");
  StreamState state = make_state();
  if (cfg_.film) {
    set_embedding(state, embedding, hooks);
  } else {
    require(embedding.empty(), "this model has no FiLM conditioning; embeddings are not accepted");
  }
  Tensor frames;
  {
    StageScope scope(hooks, Stage::kStft);
    frames = stft_offline(signal, frame_);
  }
  const Tensor out = forward_frames(frames, state, hooks);
  StageScope scope(hooks, Stage::kIstft);
  return istft_offline(out, frame_);
}

}  // namespace tfmlp
