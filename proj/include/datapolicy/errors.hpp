#pragma once

#include <stdexcept>
#include <string>

namespace datapolicy {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared while pivoting or evaluating; distinct from
/// an infeasible LP.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// The CLQR solution (computed with input bounds only) touches or leaves the
/// state box, so the input-only QP is not the constrained optimum.
class StateConstraintActive : public Error {
 public:
  using Error::Error;
};

class QpStalled : public Error {
 public:
  using Error::Error;
};

/// The policy LP has no solution at the queried state.
class PolicyInfeasible : public Error {
 public:
  using Error::Error;
};

/// A trajectory set failed validation; the message names the violated
/// assumption.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace datapolicy
