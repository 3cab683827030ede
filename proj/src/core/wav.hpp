// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_WAV_HPP_
#define TFMLP_CORE_WAV_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tfmlp {

enum class SampleFormat { kPcm16, kFloat32 };

struct AudioFile {
  std::vector<float> samples;  // interleaved
  std::size_t sample_rate = 0;
  std::size_t channels = 0;
  SampleFormat format = SampleFormat::kPcm16;

  std::size_t frames() const noexcept { return channels ? samples.size() / channels : 0; }
};

AudioFile decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(std::span<const float> samples, std::size_t sample_rate,
                                     std::size_t channels = 1,
                                     SampleFormat format = SampleFormat::kPcm16);

AudioFile read_wav(const std::string& path);
// Input error unless the file is mono at `sample_rate`.
std::vector<float> read_mono_wav(const std::string& path, std::size_t sample_rate);
void write_wav(const std::string& path, std::span<const float> samples, std::size_t sample_rate,
               std::size_t channels = 1, SampleFormat format = SampleFormat::kPcm16);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace tfmlp

#endif  // TFMLP_CORE_WAV_HPP_
