#pragma once

#include <stdexcept>
#include <string>

namespace facies {

/// Base class of every error thrown by the library. The CLI prints what()
/// as its one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix extents do not agree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed or does not carry the expected magic/layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Unknown configuration key or unparsable value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss) or received no data.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace facies
