#pragma once

#include <stdexcept>
#include <string>

namespace eba {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Two fields defined on different Fourier grids were combined.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// NaN/overflow or a failed numerical kernel (eigen-solver, bracketing).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A result that theory guarantees failed to materialize.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or config file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eba
