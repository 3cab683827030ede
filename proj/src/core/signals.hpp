// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_SIGNALS_HPP_
#define TFMLP_CORE_SIGNALS_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace tfmlp {

// mt19937_64 with distribution code written out so that sequences are the
// same under every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller.
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Voiced, syllable-modulated harmonic signal with formant shaping and a
// small noise floor; peak amplitude 0.5.
std::vector<float> speech_like(std::size_t samples, std::uint64_t seed,
                               std::size_t sample_rate = 16000);

std::vector<float> white_noise(std::size_t samples, std::uint64_t seed, float stddev);

// Unit-norm Gaussian direction, a stand-in for a speaker d-vector.
std::vector<float> random_embedding(std::size_t dim, std::uint64_t seed);

}  // namespace tfmlp

#endif  // TFMLP_CORE_SIGNALS_HPP_
