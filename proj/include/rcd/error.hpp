#pragma once

#include <stdexcept>
#include <string>

namespace rcd {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters: even kernel sizes, negative thresholds, bad configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input we deliberately do not handle (e.g. 16-bit PNG).
class UnsupportedFormat : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf detected inside a pipeline.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcd
