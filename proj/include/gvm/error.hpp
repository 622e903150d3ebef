#pragma once

#include <stdexcept>
#include <string>

namespace gvm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hyperparameters outside their admissible range (e.g. non-positive scale).
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (probabilities outside [0,1], bad grids, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Not enough observations or lag bins to form an estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Spectrum with zero or non-finite total mass.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// Cholesky failed even after the largest jitter.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Loss is not finite at the starting point of an iterative fit.
class InitError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration (unknown keys, wrong types, invalid enum strings).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or its contents could not be parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gvm
