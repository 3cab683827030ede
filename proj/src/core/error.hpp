// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TFMLP_CORE_ERROR_HPP_
#define TFMLP_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tfmlp {

enum class ErrorKind {
  kConfig,   // shapes, hyperparameters, incomplete plans
  kNumeric,  // non-finite values, overflow
  kFraming,  // wrong chunk or frame length
  kFormat,   // malformed container or WAV bytes
  kSchema,   // container tensor set does not match the graph
  kDomain,   // metric inputs outside their domain
  kInput,    // bad user-provided samples
  kIo,       // filesystem failures
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

// Throws a configuration error unless `condition` holds.
inline void require(bool condition, const std::string& message) {
  if (!condition) raise(ErrorKind::kConfig, message);
}

}  // namespace tfmlp

#endif  // TFMLP_CORE_ERROR_HPP_
