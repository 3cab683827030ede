// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "core/error.hpp"

namespace tfmlp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

[[noreturn]] void bad(std::size_t offset, const std::string& msg) {
  raise(ErrorKind::kFormat, "WAV byte " + std::to_string(offset) + ": " + msg);
}

}  // namespace

AudioFile decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) bad(bytes.size(), "truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) bad(0, "missing RIFF tag");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) bad(8, "missing WAVE tag");

  AudioFile audio;
  std::uint16_t tag = 0, bits = 0, block_align = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) bad(pos, "truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      tag = le16(f);
      audio.channels = le16(f + 2);
      audio.sample_rate = le32(f + 4);
      block_align = le16(f + 12);
      bits = le16(f + 14);
      if (tag == kFormatExtensible) {
        if (size < 40) bad(body, "truncated extensible fmt chunk");
        tag = le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) bad(pos, "data chunk before fmt chunk");
      if (audio.channels == 0) bad(pos, "zero channels");
      const bool pcm16 = tag == kFormatPcm && bits == 16;
      const bool f32 = tag == kFormatFloat && bits == 32;
      if (!pcm16 && !f32) {
        bad(pos, "unsupported sample format (tag " + std::to_string(tag) + ", " +
                     std::to_string(bits) + " bits); need 16-bit PCM or 32-bit float");
      }
      const std::size_t width = bits / 8;
      if (block_align != width * audio.channels) bad(pos, "inconsistent block alignment");
      // Tolerate a data size running past the end (streamed writers).
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t count = avail / width;
      audio.samples.resize(count - count % audio.channels);
      const std::uint8_t* d = bytes.data() + body;
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        if (pcm16) {
          audio.samples[i] = static_cast<float>(static_cast<std::int16_t>(le16(d + 2 * i))) / 32768.0f;
        } else {
          audio.samples[i] = std::bit_cast<float>(le32(d + 4 * i));
        }
      }
      audio.format = pcm16 ? SampleFormat::kPcm16 : SampleFormat::kFloat32;
      return audio;
    }
    pos = body + size + (size & 1u);
  }
  bad(pos, "no data chunk");
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples, std::size_t sample_rate,
                                     std::size_t channels, SampleFormat format) {
  require(channels >= 1 && samples.size() % channels == 0, "sample count must fill every channel");
  const std::size_t width = format == SampleFormat::kPcm16 ? 2 : 4;
  const std::size_t data_bytes = samples.size() * width;
  require(data_bytes + 36 <= 0xFFFFFFFFu, "audio too long for a WAV file");
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, static_cast<std::uint32_t>(36 + data_bytes));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate * channels * width));
  put16(out, static_cast<std::uint16_t>(channels * width));
  put16(out, static_cast<std::uint16_t>(width * 8));
  put_tag(out, "data");
  put32(out, static_cast<std::uint32_t>(data_bytes));
  for (float v : samples) {
    if (format == SampleFormat::kPcm16) {
      const float clipped = std::isfinite(v) ? std::clamp(v, -1.0f, 1.0f) : 0.0f;
      const long q = std::lround(clipped * 32767.0f);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorKind::kIo, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::kIo, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::kIo, "write failed: " + path);
}

AudioFile read_wav(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::vector<float> read_mono_wav(const std::string& path, std::size_t sample_rate) {
  AudioFile audio = read_wav(path);
  if (audio.channels != 1) {
    raise(ErrorKind::kInput, path + ": expected mono audio, got " +
                                 std::to_string(audio.channels) + " channels");
  }
  if (audio.sample_rate != sample_rate) {
    raise(ErrorKind::kInput, path + ": expected " + std::to_string(sample_rate) + " Hz, got " +
                                 std::to_string(audio.sample_rate) + " Hz");
  }
  for (float v : audio.samples) {
    if (!std::isfinite(v)) raise(ErrorKind::kInput, path + ": non-finite samples");
  }
  return std::move(audio.samples);
}

void write_wav(const std::string& path, std::span<const float> samples, std::size_t sample_rate,
               std::size_t channels, SampleFormat format) {
  write_file(path, encode_wav(samples, sample_rate, channels, format));
}

}  // namespace tfmlp
