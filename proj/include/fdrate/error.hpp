#pragma once

#include <stdexcept>
#include <string>

namespace fdrate {

/// Base class for recoverable failures raised by the library. Precondition
/// violations on caller-supplied values use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input data (trace files, table lookups).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numeric routine could not produce a finite or bracketed result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdrate
