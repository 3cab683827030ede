// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_VERIFY_HPP_
#define TFMLP_CORE_VERIFY_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tfmlp {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using SuiteCallback = std::function<void(const SuiteResult&)>;

// Runs every self-check suite; `on_result` fires as each one finishes.
std::vector<SuiteResult> run_verify(std::uint64_t seed, const SuiteCallback& on_result = {});

// Suite names in execution order.
const std::vector<std::string>& verify_suite_names();

}  // namespace tfmlp

#endif  // TFMLP_CORE_VERIFY_HPP_
