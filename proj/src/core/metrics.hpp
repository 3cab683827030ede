// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_METRICS_HPP_
#define TFMLP_CORE_METRICS_HPP_

#include <array>
#include <span>
#include <vector>

namespace tfmlp {

// Residual floor relative to the target energy; caps the score at 120 dB.
inline constexpr double kSiSdrEpsilon = 1e-12;

// Scale-invariant SDR in dB. Domain error for a zero reference or
// mismatched lengths; -inf for an estimate orthogonal to the reference.
double si_sdr(std::span<const double> reference, std::span<const double> estimate);
double si_sdr(std::span<const float> reference, std::span<const float> estimate);

double si_sdr_improvement(std::span<const float> reference, std::span<const float> estimate,
                          std::span<const float> mixture);

struct PitResult {
  std::array<std::size_t, 2> permutation{0, 1};  // estimate index for each reference
  double mean_db = 0.0;
  std::array<double, 2> per_source{};
};

// Two-speaker permutation-invariant SI-SDR.
PitResult pit_score(std::span<const std::vector<float>> references,
                    std::span<const std::vector<float>> estimates);

}  // namespace tfmlp

#endif  // TFMLP_CORE_METRICS_HPP_
