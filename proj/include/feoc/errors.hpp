#pragma once

#include <stdexcept>
#include <string>

namespace feoc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot was <= 0; the caller should raise its Tikhonov term.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// A rollout produced a NaN/Inf state (divergent policy or controls).
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class DivergedTraining : public Error {
 public:
  using Error::Error;
};

class UnsupportedTaskKind : public Error {
 public:
  using Error::Error;
};

/// Operator checkpoint was trained against a different basis.
class BasisMismatch : public Error {
 public:
  using Error::Error;
};

/// Too many trajectory solves failed to reach the gradient tolerance.
class NotConverged : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatVersionMismatch : public IoError {
 public:
  using IoError::IoError;
};

class ChecksumFailure : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedFile : public IoError {
 public:
  using IoError::IoError;
};

/// Invalid experiment configuration; `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace feoc
