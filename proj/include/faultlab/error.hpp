// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faultlab {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that cannot be combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Token ids out of range, over-long sequences, malformed configs.
class InputError : public Error {
 public:
  using Error::Error;
};

enum class CheckpointErrorKind {
  kIo,
  kBadMagic,
  kBadHeader,
  kTruncated,
  kOverlap,
  kShapeLengthMismatch,
  kUnknownDtype,
  kDuplicateName,
};

const char* to_string(CheckpointErrorKind kind);

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

/// Tensor map does not form a valid model (missing paths, gaps in layer ids).
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Fault scope matched nothing or names a layer the model does not have.
class TargetingError : public Error {
 public:
  using Error::Error;
};

/// A hook site already carries a fault.
class ConflictError : public Error {
 public:
  using Error::Error;
};

enum class RevertErrorKind { kForeign, kDoubleRevert, kShapeMismatch };

class RevertError : public Error {
 public:
  RevertError(RevertErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  RevertErrorKind kind() const { return kind_; }

 private:
  RevertErrorKind kind_;
};

/// Fault spec text that does not match the grammar.
class SpecParseError : public Error {
 public:
  SpecParseError(const std::string& what, std::string token)
      : Error(what), token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Dataset files: unreadable, malformed records. `line` is 1-based, 0 if unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace faultlab
