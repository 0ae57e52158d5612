#pragma once

#include <stdexcept>
#include <string>

namespace lclab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergentNormalizer : public Error {
 public:
  using Error::Error;
};

class MassLeakage : public Error {
 public:
  using Error::Error;
};

class GridTooSmall : public Error {
 public:
  using Error::Error;
};

class NonPositiveDensity : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class SingularCovariance : public Error {
 public:
  using Error::Error;
};

class SingularSolve : public Error {
 public:
  using Error::Error;
};

class UnsupportedDensity : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed density, grid, body or config string.
class SpecParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lclab
