#pragma once

#include <stdexcept>
#include <string>

namespace convexflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration; the CLI maps these to exit code 2.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class StencilOutOfRange : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class CflViolation : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class GuardExceeded : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Non-finite values or similar breakdowns; exit code 3.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace convexflow
