// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sgm {

/// Broad failure categories. The CLI maps each one to exactly one exit code.
enum class ErrorKind {
  Dimension,       ///< shapes of images / masks / grids disagree
  Parameter,       ///< out-of-range configuration value
  SizeConstraint,  ///< mix partner smaller than the primary image
  Decode,          ///< unreadable or malformed input file
  Io,              ///< filesystem failure while writing
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error(ErrorKind::Parameter, what) {}
};

struct SizeConstraintError : Error {
  explicit SizeConstraintError(const std::string& what) : Error(ErrorKind::SizeConstraint, what) {}
};

struct DecodeError : Error {
  explicit DecodeError(const std::string& what) : Error(ErrorKind::Decode, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace sgm
