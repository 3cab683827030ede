// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tfmlp {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<float> speech_like(std::size_t samples, std::uint64_t seed,
                               std::size_t sample_rate) {
  Rng rng(seed);
  const double sr = static_cast<double>(sample_rate);
  const double two_pi = 2.0 * std::numbers::pi;
  const double base_f0 = rng.uniform(100.0, 220.0);
  const double vibrato_rate = rng.uniform(0.3, 1.2);
  const double vibrato_phase = rng.uniform(0.0, two_pi);
  const double syllable_rate = rng.uniform(3.0, 5.5);
  const double syllable_phase = rng.uniform(0.0, two_pi);
  const double formants[3] = {rng.uniform(300.0, 800.0), rng.uniform(900.0, 2200.0),
                              rng.uniform(2300.0, 3200.0)};
  const double formant_drift = rng.uniform(0.5, 2.0);

  std::vector<double> out(samples, 0.0);
  double phase = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) / sr;
    const double f0 = base_f0 * (1.0 + 0.12 * std::sin(two_pi * vibrato_rate * t + vibrato_phase));
    phase += two_pi * f0 / sr;
    if (phase > two_pi * 1024.0) phase -= two_pi * 1024.0;
    const double env_raw = 0.5 * (1.0 - std::cos(two_pi * syllable_rate * t + syllable_phase));
    const double envelope = env_raw * env_raw;
    const double shift = 1.0 + 0.15 * std::sin(two_pi * formant_drift * t);
    double v = 0.0;
    const std::size_t harmonics = static_cast<std::size_t>(0.45 * sr / f0);
    for (std::size_t k = 1; k <= harmonics; ++k) {
      const double fk = static_cast<double>(k) * f0;
      double gain = 0.0;
      for (double fm : formants) {
        const double d = (fk - fm * shift) / 180.0;
        gain += std::exp(-d * d);
      }
      v += (gain + 0.02) / static_cast<double>(k) * std::sin(static_cast<double>(k) * phase);
    }
    out[n] = envelope * v + 0.01 * rng.normal();
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::fabs(v));
  const double gain = peak > 0.0 ? 0.5 / peak : 0.0;
  std::vector<float> result(samples);
  for (std::size_t n = 0; n < samples; ++n) result[n] = static_cast<float>(out[n] * gain);
  return result;
}

std::vector<float> white_noise(std::size_t samples, std::uint64_t seed, float stddev) {
  Rng rng(seed);
  std::vector<float> out(samples);
  for (float& v : out) v = static_cast<float>(rng.normal() * stddev);
  return out;
}

std::vector<float> random_embedding(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(norm > 0 ? v[i] / norm : 0.0);
  return out;
}

}  // namespace tfmlp
