#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (invalid parameter, unphysical symplectic eigenvalue, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix that should describe a physical Gaussian state
/// fails the symplectic uncertainty bound or positive definiteness.
class PhysicalityError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not converge within its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A statistical estimator was asked to condition on (near) constant data.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A requested sampling covariance is not positive semidefinite.
class CovarianceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvqkd
