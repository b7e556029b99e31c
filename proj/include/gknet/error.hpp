#pragma once

#include <stdexcept>
#include <string>

namespace gknet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor extents or layer chaining.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter, unknown name, or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in the wrong lifecycle state (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown during training (NaN/Inf loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Model spec parse failure; carries the 1-based line number.
class ParseError : public ConfigError {
 public:
  ParseError(int line, const std::string& message)
      : ConfigError("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace gknet
