// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fforge {

// Validation errors map to exit code 1 / FF_ERR_INVALID, I/O errors to 2 / FF_ERR_IO.
class Error : public std::runtime_error {
 public:
  enum class Kind { kValidation, kIo };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(Kind::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::kIo, what) {}
};

}  // namespace fforge
