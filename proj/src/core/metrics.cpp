// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"

namespace tfmlp {

double si_sdr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.empty() || reference.size() != estimate.size()) {
    raise(ErrorKind::kDomain, "si_sdr needs equal, non-zero lengths (got " +
                                  std::to_string(reference.size()) + " and " +
                                  std::to_string(estimate.size()) + ")");
  }
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += estimate[i] * reference[i];
    ref_energy += reference[i] * reference[i];
  }
  if (!(ref_energy > 0.0)) raise(ErrorKind::kDomain, "si_sdr reference is identically zero");
  if (!std::isfinite(dot) || !std::isfinite(ref_energy)) {
    raise(ErrorKind::kDomain, "si_sdr inputs must be finite");
  }
  const double alpha = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    residual += e * e;
  }
  if (target == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target / (residual + kSiSdrEpsilon * target));
}

double si_sdr(std::span<const float> reference, std::span<const float> estimate) {
  const std::vector<double> r(reference.begin(), reference.end());
  const std::vector<double> e(estimate.begin(), estimate.end());
  return si_sdr(std::span<const double>(r), std::span<const double>(e));
}

double si_sdr_improvement(std::span<const float> reference, std::span<const float> estimate,
                          std::span<const float> mixture) {
  if (mixture.size() != reference.size()) {
    raise(ErrorKind::kDomain, "mixture length differs from reference");
  }
  return si_sdr(reference, estimate) - si_sdr(reference, mixture);
}

PitResult pit_score(std::span<const std::vector<float>> references,
                    std::span<const std::vector<float>> estimates) {
  if (references.size() != 2 || estimates.size() != 2) {
    raise(ErrorKind::kDomain, "pit_score supports exactly two sources");
  }
  double score[2][2];
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t e = 0; e < 2; ++e) score[r][e] = si_sdr(references[r], estimates[e]);
  const double identity = 0.5 * (score[0][0] + score[1][1]);
  const double swapped = 0.5 * (score[0][1] + score[1][0]);
  PitResult out;
  if (swapped > identity) {
    out.permutation = {1, 0};
    out.mean_db = swapped;
    out.per_source = {score[0][1], score[1][0]};
  } else {
    out.mean_db = identity;
    out.per_source = {score[0][0], score[1][1]};
  }
  return out;
}

}  // namespace tfmlp
