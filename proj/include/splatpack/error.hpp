// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splatpack {

enum class ErrorKind {
  kParse,
  kValidation,
  kIo,
  kInvalidParam,
  kIndexOutOfRange,
  kDimensionMismatch,
  kDegenerateScene,
  kEmptyCloud,
  kMissingParent,
  kNonFinite,
  kOverflow,
  kModelMismatch,
  kCorruptStream,
};

std::string_view error_kind_name(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace splatpack
