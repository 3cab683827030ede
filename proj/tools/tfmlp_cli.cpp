// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// tfmlp command-line tool. Talks to the engine only through the C API.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfmlp/tfmlp.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kFormat = 2, kNumeric = 3 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(tfmlp_status s) {
  switch (s) {
    case TFMLP_OK: return kOk;
    case TFMLP_ERR_CONFIG:
    case TFMLP_ERR_ARGUMENT: return kUsage;
    case TFMLP_ERR_FORMAT:
    case TFMLP_ERR_SCHEMA:
    case TFMLP_ERR_INPUT:
    case TFMLP_ERR_IO: return kFormat;
    default: return kNumeric;
  }
}

void check(tfmlp_status s) {
  if (s != TFMLP_OK) throw Failure{exit_code(s), tfmlp_last_error()};
}

struct ModelDeleter {
  void operator()(tfmlp_model* m) const { tfmlp_model_free(m); }
};
struct SessionDeleter {
  void operator()(tfmlp_session* s) const { tfmlp_session_free(s); }
};
using ModelPtr = std::unique_ptr<tfmlp_model, ModelDeleter>;
using SessionPtr = std::unique_ptr<tfmlp_session, SessionDeleter>;

// Takes ownership of a C string from the library.
std::string take(char* s) {
  std::string out(s ? s : "");
  tfmlp_string_free(s);
  return out;
}

ModelPtr load(const std::string& path) {
  tfmlp_model* m = nullptr;
  check(tfmlp_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kFormat, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<float> read_mono(const std::string& path, std::size_t sample_rate) {
  float* data = nullptr;
  std::size_t frames = 0, channels = 0, rate = 0;
  check(tfmlp_wav_read(path.c_str(), &data, &frames, &channels, &rate));
  std::vector<float> out(data, data + frames * channels);
  tfmlp_buffer_free(data);
  if (channels != 1) {
    throw Failure{kFormat, path + ": expected mono audio, got " + std::to_string(channels) +
                               " channels"};
  }
  if (rate != sample_rate) {
    throw Failure{kFormat, path + ": sample rate " + std::to_string(rate) + " Hz, model expects " +
                               std::to_string(sample_rate) + " Hz"};
  }
  return out;
}

// Raw little-endian f32 values.
std::vector<float> read_embedding(const std::string& path, std::size_t dim) {
  const std::string bytes = read_text(path);
  if (bytes.size() != dim * sizeof(float)) {
    throw Failure{kFormat, path + ": embedding file has " + std::to_string(bytes.size()) +
                               " bytes, expected " + std::to_string(dim * sizeof(float))};
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) {
      bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 4 + b]);
    }
    std::memcpy(&out[i], &bits, sizeof(float));
  }
  return out;
}

// [outputs x n] for the whole input signal.
std::vector<float> run(const tfmlp_model* model, const std::vector<float>& signal,
                       const std::vector<float>* embedding) {
  tfmlp_session* raw = nullptr;
  check(tfmlp_session_create(model, &raw));
  SessionPtr session(raw);
  if (embedding) check(tfmlp_session_set_embedding(raw, embedding->data(), embedding->size()));
  std::vector<float> out(tfmlp_model_outputs(model) * signal.size());
  check(tfmlp_session_process(raw, signal.data(), signal.size(), out.data(), out.size()));
  return out;
}

void write(const std::string& path, const float* samples, std::size_t n, std::size_t rate,
           bool float32) {
  check(tfmlp_wav_write(path.c_str(), samples, n, 1, rate, float32 ? 1 : 0));
}

struct Options {
  std::string model, in, out, out_prefix, embedding, preset, calib, config;
  double seconds = 10.0;
  std::size_t warmup = 10;
  std::size_t chunks = 1000;
  std::uint64_t seed = 0;
  bool json = false, baselines = false, zero_bias = false, float32 = false;
};

int cmd_separate(const Options& o) {
  ModelPtr model = load(o.model);
  if (tfmlp_model_embedding_dim(model.get()) != 0) {
    throw Failure{kUsage, o.model + " is a target extraction model; use 'extract'"};
  }
  const std::size_t rate = tfmlp_model_sample_rate(model.get());
  const std::vector<float> mix = read_mono(o.in, rate);
  const std::vector<float> out = run(model.get(), mix, nullptr);
  const std::size_t outputs = tfmlp_model_outputs(model.get());
  for (std::size_t s = 0; s < outputs; ++s) {
    const std::string path = o.out_prefix + std::to_string(s + 1) + ".wav";
    write(path, out.data() + s * mix.size(), mix.size(), rate, o.float32);
    std::cout << path << "\n";
  }
  return kOk;
}

int cmd_extract(const Options& o) {
  ModelPtr model = load(o.model);
  const std::size_t dim = tfmlp_model_embedding_dim(model.get());
  if (dim == 0) throw Failure{kUsage, o.model + " takes no embedding; use 'separate'"};
  const std::size_t rate = tfmlp_model_sample_rate(model.get());
  const std::vector<float> mix = read_mono(o.in, rate);
  const std::vector<float> emb = read_embedding(o.embedding, dim);
  const std::vector<float> out = run(model.get(), mix, &emb);
  write(o.out, out.data(), mix.size(), rate, o.float32);
  std::cout << o.out << "\n";
  return kOk;
}

int cmd_profile(const Options& o) {
  ModelPtr model = load(o.model);
  const std::string report =
      take([&] {
        char* s = nullptr;
        check(tfmlp_profile(model.get(), o.seconds, o.warmup, o.seed, o.json ? 1 : 0, &s));
        return s;
      }());
  if (!o.baselines) {
    std::cout << report << (o.json ? "\n" : "");
    return kOk;
  }
  char* info = nullptr;
  check(tfmlp_model_info(model.get(), &info));
  const std::string cfg = nlohmann::json::parse(take(info)).at("config").dump();
  char* cmp = nullptr;
  check(tfmlp_compare_runtime(cfg.c_str(), o.chunks, o.seed, &cmp));
  const std::string baselines = take(cmp);
  if (o.json) {
    std::cout << "{\"profile\": " << report << ",\n\"baselines\": " << baselines << "}\n";
  } else {
    std::cout << report << "\nbaselines (median ms per chunk)\n" << baselines << "\n";
  }
  return kOk;
}

int cmd_quantize(const Options& o) {
  ModelPtr model = load(o.model);
  const std::size_t rate = tfmlp_model_sample_rate(model.get());
  std::vector<std::string> files;
  std::error_code ec;
  for (fs::directory_iterator it(o.calib, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".wav") {
      files.push_back(it->path().string());
    }
  }
  if (ec) throw Failure{kFormat, o.calib + ": " + ec.message()};
  if (files.empty()) throw Failure{kUsage, o.calib + ": no .wav files for calibration"};
  std::sort(files.begin(), files.end());

  std::vector<std::vector<float>> audio;
  for (const auto& f : files) audio.push_back(read_mono(f, rate));
  std::vector<const float*> ptrs;
  std::vector<std::size_t> lengths;
  for (const auto& a : audio) {
    ptrs.push_back(a.data());
    lengths.push_back(a.size());
  }
  std::vector<float> emb;
  if (!o.embedding.empty()) {
    const std::size_t dim = tfmlp_model_embedding_dim(model.get());
    if (dim == 0) throw Failure{kUsage, o.model + " takes no embedding"};
    emb = read_embedding(o.embedding, dim);
  }
  tfmlp_model* q = nullptr;
  check(tfmlp_model_quantize(model.get(), o.preset.c_str(), ptrs.data(), lengths.data(),
                             ptrs.size(), emb.empty() ? nullptr : emb.data(), emb.size(), &q));
  ModelPtr quantized(q);
  check(tfmlp_model_save(quantized.get(), o.out.c_str()));
  std::cout << o.out << ": preset " << o.preset << ", " << fs::file_size(o.out) << " bytes, "
            << files.size() << " calibration file(s)\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  int all = 0;
  check(tfmlp_verify(
      o.seed,
      [](const char* suite, int passed, const char* detail, void*) {
        std::cout << (passed ? "PASS " : "FAIL ") << suite << "  " << detail << std::endl;
      },
      nullptr, &all));
  return all ? kOk : kNumeric;
}

int cmd_init_random(const Options& o) {
  std::string cfg;
  if (!o.config.empty()) cfg = read_text(o.config);
  tfmlp_model* m = nullptr;
  check(tfmlp_model_init_random(o.config.empty() ? nullptr : cfg.c_str(), o.seed,
                                o.zero_bias ? 1 : 0, &m));
  ModelPtr model(m);
  check(tfmlp_model_save(model.get(), o.out.c_str()));
  std::cout << o.out << ": " << tfmlp_model_param_count(model.get()) << " parameters, "
            << fs::file_size(o.out) << " bytes\n";
  return kOk;
}

int cmd_inspect(const Options& o) {
  ModelPtr model = load(o.model);
  char* s = nullptr;
  check(tfmlp_model_info(model.get(), &s));
  const std::string info = take(s);
  if (o.json) {
    std::cout << info << "\n";
    return kOk;
  }
  const auto doc = nlohmann::ordered_json::parse(info);
  std::printf("model        %s (%ju bytes)\n", o.model.c_str(),
              static_cast<std::uintmax_t>(fs::file_size(o.model)));
  std::printf("preset       %s\n", doc.at("preset").get<std::string>().c_str());
  std::printf("parameters   %zu\n", tfmlp_model_param_count(model.get()));
  std::printf("outputs      %zu\n", tfmlp_model_outputs(model.get()));
  if (tfmlp_model_embedding_dim(model.get())) {
    std::printf("embedding    %zu\n", tfmlp_model_embedding_dim(model.get()));
  }
  std::printf("\nmodule       parameters\n");
  for (const auto& [k, v] : doc.at("breakdown").items()) {
    std::printf("  %-12s %zu\n", k.c_str(), v.get<std::size_t>());
  }
  std::printf("\npreset                      container bytes\n");
  for (const auto& [k, v] : doc.at("estimated_sizes").items()) {
    std::printf("  %-26s %zu\n", k.c_str(), v.get<std::size_t>());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tfmlp: streaming speech separation engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tfmlp_version());
  Options o;

  std::vector<std::string> preset_list;
  std::string presets;
  for (std::size_t i = 0; i < tfmlp_preset_count(); ++i) {
    preset_list.emplace_back(tfmlp_preset_name(i));
    presets += (i ? ", " : "") + preset_list.back();
  }

  auto* sep = app.add_subcommand(
      "separate", "Split a two-speaker mixture into <prefix>1.wav and <prefix>2.wav");
  sep->add_option("--model", o.model, "Model container")->required();
  sep->add_option("--in", o.in, "Mono mixture WAV")->required();
  sep->add_option("--out-prefix", o.out_prefix, "Output path prefix")->required();
  sep->add_flag("--float32", o.float32, "Write IEEE float WAVs instead of 16-bit PCM");

  auto* ext = app.add_subcommand("extract", "Extract the speaker matching an embedding");
  ext->add_option("--model", o.model, "Model container")->required();
  ext->add_option("--in", o.in, "Mono mixture WAV")->required();
  ext->add_option("--embedding", o.embedding, "Raw little-endian f32 speaker embedding")->required();
  ext->add_option("--out", o.out, "Output WAV")->required();
  ext->add_flag("--float32", o.float32, "Write an IEEE float WAV instead of 16-bit PCM");

  auto* prof = app.add_subcommand("profile", "Per-stage latency and real-time factor");
  prof->add_option("--model", o.model, "Model container")->required();
  prof->add_option("--seconds", o.seconds, "Seconds of audio to time")
      ->capture_default_str()
      ->check(CLI::Range(1.0, 3600.0));
  prof->add_option("--warmup", o.warmup, "Untimed leading chunks")->capture_default_str();
  prof->add_option("--seed", o.seed, "Noise seed")->capture_default_str();
  prof->add_flag("--json", o.json, "JSON output");
  prof->add_flag("--baselines", o.baselines, "Also time the frequency-stage baselines");
  prof->add_option("--chunks", o.chunks, "Chunks for --baselines")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));

  auto* quant = app.add_subcommand("quantize", "Calibrate and apply a precision preset");
  quant->add_option("--model", o.model, "Float model container")->required();
  quant->add_option("--preset", o.preset, "One of: " + presets)
      ->required()
      ->check(CLI::IsMember(preset_list));
  quant->add_option("--calib", o.calib, "Directory of mono calibration WAVs")->required();
  quant->add_option("--embedding", o.embedding, "Calibration embedding for extraction models");
  quant->add_option("--out", o.out, "Output container")->required();

  auto* ver = app.add_subcommand("verify", "Run the built-in numerical self-checks");
  ver->add_option("--seed", o.seed, "Seed for random draws")->capture_default_str();

  auto* init = app.add_subcommand("init-random", "Write a model with seeded random weights");
  init->add_option("--config", o.config, "Model config JSON (default: separation model)");
  init->add_option("--seed", o.seed, "Weight seed")->capture_default_str();
  init->add_option("--out", o.out, "Output container")->required();
  init->add_flag("--zero-bias", o.zero_bias, "Set every bias to zero");

  auto* insp = app.add_subcommand("inspect", "Parameter counts and container sizes");
  insp->add_option("model", o.model, "Model container")->required();
  insp->add_flag("--json", o.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sep) return cmd_separate(o);
    if (*ext) return cmd_extract(o);
    if (*prof) return cmd_profile(o);
    if (*quant) return cmd_quantize(o);
    if (*ver) return cmd_verify(o);
    if (*init) return cmd_init_random(o);
    if (*insp) return cmd_inspect(o);
  } catch (const Failure& f) {
    std::cerr << "tfmlp: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "tfmlp: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
