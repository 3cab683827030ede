// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <tfmlp/tfmlp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(TFMLP_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  std::FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tfmlp_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string wav(const std::string& name, size_t frames, size_t rate = 16000, size_t channels = 1) {
    std::vector<float> x(frames * channels);
    for (size_t i = 0; i < x.size(); ++i) x[i] = 0.2f * std::sin(0.05f * float(i)) + 0.05f * std::sin(0.31f * float(i));
    const std::string p = path(name);
    EXPECT_EQ(tfmlp_wav_write(p.c_str(), x.data(), frames, channels, rate, 0), TFMLP_OK);
    return p;
  }

  size_t wav_frames(const std::string& p, size_t* channels = nullptr) {
    float* s = nullptr;
    size_t frames = 0, ch = 0, rate = 0;
    EXPECT_EQ(tfmlp_wav_read(p.c_str(), &s, &frames, &ch, &rate), TFMLP_OK) << p;
    tfmlp_buffer_free(s);
    if (channels) *channels = ch;
    return frames;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_NE(run("frobnicate").code, 0);
  EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, InitRandomAndInspect) {
  ASSERT_EQ(run("init-random --seed 3 --out " + path("m.tfm")).code, 0);
  const CliResult text = run("inspect " + path("m.tfm"));
  ASSERT_EQ(text.code, 0) << text.out;
  EXPECT_NE(text.out.find("492252"), std::string::npos) << text.out;
  const CliResult js = run("inspect " + path("m.tfm") + " --json");
  ASSERT_EQ(js.code, 0);
  const auto doc = nlohmann::json::parse(js.out);
  EXPECT_EQ(doc.at("param_count"), 492252);
  EXPECT_EQ(doc.at("preset"), "fp32");
}

TEST_F(Cli, SeparateWritesTwoOutputs) {
  ASSERT_EQ(run("init-random --seed 4 --out " + path("m.tfm")).code, 0);
  const std::string in = wav("mix.wav", 5000);
  const CliResult r = run("separate --model " + path("m.tfm") + " --in " + in + " --out-prefix " + path("est"));
  ASSERT_EQ(r.code, 0) << r.out;
  size_t ch = 0;
  EXPECT_EQ(wav_frames(path("est1.wav"), &ch), 5000u);
  EXPECT_EQ(ch, 1u);
  EXPECT_EQ(wav_frames(path("est2.wav")), 5000u);
}

TEST_F(Cli, InputErrorsMapToExitCodes) {
  ASSERT_EQ(run("init-random --seed 5 --out " + path("m.tfm")).code, 0);
  const std::string model = " --model " + path("m.tfm");
  EXPECT_EQ(run("separate" + model + " --in " + wav("8k.wav", 800, 8000) + " --out-prefix " + path("o")).code, 2);
  EXPECT_EQ(run("separate" + model + " --in " + wav("st.wav", 800, 16000, 2) + " --out-prefix " + path("o")).code, 2);
  EXPECT_EQ(run("separate" + model + " --in " + path("missing.wav") + " --out-prefix " + path("o")).code, 2);
  std::ofstream(path("bad.tfm")) << "garbage";
  EXPECT_EQ(run("inspect " + path("bad.tfm")).code, 2);
  EXPECT_EQ(run("quantize" + model + " --preset int4 --calib " + dir_.string() + " --out " + path("q.tfm")).code, 1);
  EXPECT_EQ(run("init-random --config " + path("none.json") + " --out " + path("x.tfm")).code, 2);
}

TEST_F(Cli, ConfigFileSelectsExtraction) {
  std::ofstream(path("tse.json")) << R"({"speakers": 1, "film": true})";
  ASSERT_EQ(run("init-random --config " + path("tse.json") + " --seed 6 --out " + path("t.tfm")).code, 0);
  const std::string in = wav("mix.wav", 3000);
  std::vector<float> e(256, 0.0625f);
  {
    std::ofstream f(path("spk.bin"), std::ios::binary);
    f.write(reinterpret_cast<const char*>(e.data()), std::streamsize(e.size() * sizeof(float)));
  }
  const CliResult r = run("extract --model " + path("t.tfm") + " --in " + in + " --embedding " + path("spk.bin") +
                    " --out " + path("target.wav"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(wav_frames(path("target.wav")), 3000u);
  {
    std::ofstream f(path("short.bin"), std::ios::binary);
    f.write(reinterpret_cast<const char*>(e.data()), 100);
  }
  EXPECT_EQ(run("extract --model " + path("t.tfm") + " --in " + in + " --embedding " + path("short.bin") +
                " --out " + path("x.wav")).code, 2);
  EXPECT_EQ(run("separate --model " + path("t.tfm") + " --in " + in + " --out-prefix " + path("s")).code, 1);
  std::ofstream(path("bad.json")) << R"({"compression": 5})";
  EXPECT_EQ(run("init-random --config " + path("bad.json") + " --out " + path("b.tfm")).code, 1);
}

TEST_F(Cli, QuantizeShrinksTheContainer) {
  ASSERT_EQ(run("init-random --seed 7 --out " + path("m.tfm")).code, 0);
  fs::create_directories(dir_ / "calib");
  wav("calib/a.wav", 4000);
  wav("calib/b.wav", 2000);
  const CliResult r = run("quantize --model " + path("m.tfm") + " --preset int8 --calib " + (dir_ / "calib").string() +
                    " --out " + path("q.tfm"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_LE(fs::file_size(path("q.tfm")), 600000u);
  EXPECT_LT(fs::file_size(path("q.tfm")) * 3, fs::file_size(path("m.tfm")));
  fs::create_directories(dir_ / "empty");
  EXPECT_NE(run("quantize --model " + path("m.tfm") + " --preset int8 --calib " + (dir_ / "empty").string() +
                " --out " + path("q2.tfm")).code, 0);
}

TEST_F(Cli, ProfileJson) {
  ASSERT_EQ(run("init-random --seed 8 --out " + path("m.tfm")).code, 0);
  const CliResult r = run("profile --model " + path("m.tfm") + " --seconds 1 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_GT(doc.at("rtf").get<double>(), 0.0);
}

}  // namespace
