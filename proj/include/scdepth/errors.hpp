#pragma once

#include <stdexcept>
#include <string>

namespace scdepth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, invalid parameters, malformed scene descriptions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be evaluated (empty sets, degenerate geometry).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Divergence, lost tracking, or an empty loss support during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No pixel survives projection, masking, or both.
class NoOverlapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TrackingLostError : public NumericalError {
 public:
  TrackingLostError(const std::string& what, int frame = -1)
      : NumericalError(what), frame_(frame) {}
  int frame() const { return frame_; }

 private:
  int frame_;
};

}  // namespace scdepth
