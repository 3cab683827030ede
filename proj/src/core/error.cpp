// Copyright 2026 The tfmlp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "core/error.hpp"

namespace tfmlp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kFraming: return "framing error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace tfmlp
