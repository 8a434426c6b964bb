#pragma once

#include <stdexcept>
#include <string>

namespace nirs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: parse failures, NaN cells, shape mismatches.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain operator or model parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but the operation has no finite answer on it
/// (constant spectrum under SNV, zero-variance target under OSC, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Manifest or CLI configuration problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nirs
