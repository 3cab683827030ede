// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_LAYERS_HPP_
#define TFMLP_CORE_LAYERS_HPP_

#include <array>
#include <chrono>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/plan.hpp"
#include "core/quant.hpp"
#include "core/tensor.hpp"

namespace tfmlp {

enum class Stage {
  kStft,
  kEncoder,
  kFilm,
  kCompress,
  kMixer,
  kLstm,
  kDecompress,
  kDecoder,
  kIstft,
};
inline constexpr std::size_t kStageCount = 9;
const char* to_string(Stage stage) noexcept;

struct StageTimes {
  std::array<double, kStageCount> seconds{};
  double& operator[](Stage s) noexcept { return seconds[static_cast<std::size_t>(s)]; }
  double operator[](Stage s) const noexcept { return seconds[static_cast<std::size_t>(s)]; }
};

// Receives the float value of every activation node before its precision
// assignment is applied.
using EdgeObserver = std::function<void(const std::string& node, std::span<const float>)>;

struct ForwardHooks {
  EdgeObserver observe;
  StageTimes* times = nullptr;
};

class StageScope {
 public:
  StageScope(const ForwardHooks& hooks, Stage stage) noexcept;
  ~StageScope();
  StageScope(const StageScope&) = delete;
  StageScope& operator=(const StageScope&) = delete;

 private:
  StageTimes* times_;
  Stage stage_;
  std::chrono::steady_clock::time_point start_;
};

// An activation node: observed, then rounded or fake-quantized.
struct Edge {
  std::string name;
  Assignment assign;
};

void apply_edge(const Edge& edge, std::span<float> values, const ForwardHooks& hooks);

// Kernel-1 convolution in matrix form: out[r, n] = W[r, :] . in[:, n] + b[r].
// Every layer of the network (convolutions via im2col) runs through this.
struct AffineLayer {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> weight;             // [rows x cols]
  std::vector<float> bias;               // [rows] or empty
  std::vector<std::size_t> row_channel;  // parameter output channel of each row
  std::size_t channels = 0;              // distinct output channels
  bool relu = false;

  Precision weight_precision = Precision::kF32;
  Edge in;
  Edge out;
  QuantizedMatrix qweight;
  std::vector<std::int32_t> qbias;
};

// Float layer. `row_channel` defaults to the identity.
AffineLayer make_affine(std::string name, std::vector<float> weight, std::size_t rows,
                        std::size_t cols, std::vector<float> bias, bool relu = false,
                        std::vector<std::size_t> row_channel = {});

// Reads "<name>.weight", "<name>.in" and "<name>.out" from `plan`, rounds
// or quantizes the weights and prepares the integer bias.
void assign_precision(AffineLayer& layer, const PrecisionPlan& plan);

// Per output channel max |w|, for weight calibration.
std::vector<float> weight_channel_absmax(const AffineLayer& layer);

// input: [cols x columns]; returns [rows x columns].
Tensor run_affine(const AffineLayer& layer, std::span<const float> input, std::size_t columns,
                  const ForwardHooks& hooks);

struct MixerLayers {
  AffineLayer tok_fc1, tok_fc2, ch_fc1, ch_fc2;
  Edge tok_res, ch_res;
};

struct LstmLayers {
  std::size_t hidden = 0;
  AffineLayer wx, wh, proj;
  Edge gates, act, cell, hidden_state, res;
};

struct LstmState {
  Tensor h;  // [H x F']
  Tensor c;  // [H x F']

  static LstmState zeros(std::size_t hidden, std::size_t bins);
};

// x: [C x F' x T]; all repetitions of one block.
Tensor run_mixers(std::span<const MixerLayers> reps, const Tensor& x, const ForwardHooks& hooks);

// x: [C x F'] one frame; returns [C x F'] and advances `state`.
Tensor run_lstm_step(const LstmLayers& lstm, const Tensor& x, LstmState& state,
                     const ForwardHooks& hooks);

}  // namespace tfmlp

#endif  // TFMLP_CORE_LAYERS_HPP_
