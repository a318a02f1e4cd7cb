// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mslab {

// Exception hierarchy. The C API maps each class onto one status code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range configuration (bad N, unknown family, p <= 0, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A theorem's hypotheses are not met by the requested exponents or weights.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Work would exceed a configured size limit.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mslab
