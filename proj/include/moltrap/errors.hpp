#pragma once

#include <stdexcept>
#include <string>

namespace moltrap {

// Every failure raised by the library derives from Error so callers can
// catch the whole family; the subclasses map onto CLI exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Dimension mismatch in a unit conversion.
struct UnitError : Error {
  using Error::Error;
};

// Malformed pointwise data file.
struct FormatError : Error {
  using Error::Error;
};

struct RangeError : Error {
  using Error::Error;
};

// Missing or inconsistent configuration (grid cutoff, constants, keys).
struct ConfigError : Error {
  using Error::Error;
};

struct InvariantError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Numerical failures: no root in a bracket, evaluation on top of a pole,
// a calibration without solution.
struct NumericalError : Error {
  using Error::Error;
};

struct NoRootError : NumericalError {
  using NumericalError::NumericalError;
};

struct PoleError : NumericalError {
  using NumericalError::NumericalError;
};

struct CalibrationError : NumericalError {
  using NumericalError::NumericalError;
};

} // namespace moltrap
