#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace instobj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad face index, missing range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse: shape mismatches, duplicate coordinates, empty inputs.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a constitutive law.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested value exceeds what the model can produce (e.g. force above max).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Field evaluation too close to a point dipole.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Checkpoint checksum or size mismatch.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Layer sizes that do not chain or do not match what the caller expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace instobj
