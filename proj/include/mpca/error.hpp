#pragma once

#include <stdexcept>
#include <string>

namespace mpca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested sizes or ranks are incompatible with the operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data or parameters are malformed (non-finite entries, bad ranges, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition of the callee.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The problem is numerically degenerate (e.g. rank-deficient alignment).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpca
