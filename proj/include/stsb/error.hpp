// stsb/error.hpp

// Copyright 2026  The stsb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef STSB_ERROR_HPP
#define STSB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace stsb {

enum class ErrorKind {
  Format,           // malformed file header or record
  UnsupportedCodec,
  EmptyAudio,
  Parameter,        // argument outside its documented range
  Config,           // configuration inconsistent with data or other settings
  NumericInput,     // NaN/Inf handed to a numeric routine
  Decomposition,    // iterative solver failed to converge
  Shape,            // dimension mismatch
  Numeric,          // NaN/Inf produced internally
  TrainingData,
  Data,
  Io,
  Checksum,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::UnsupportedCodec: return "unsupported codec";
    case ErrorKind::EmptyAudio: return "empty audio";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::NumericInput: return "numeric input error";
    case ErrorKind::Decomposition: return "decomposition error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::TrainingData: return "training data error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Checksum: return "checksum error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string &what) {
  if (!cond) fail(kind, what);
}

}  // namespace stsb

#endif  // STSB_ERROR_HPP
