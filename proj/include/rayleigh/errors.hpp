#pragma once

#include <stdexcept>
#include <string>

namespace rayleigh {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input or configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (root finding, quadrature, contour placement, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Assumption audit failure on the spectrum (non-simple embedded roots, A3-type).
class AuditError : public Error {
 public:
  using Error::Error;
};

#define RAYLEIGH_DEFINE_ERROR(Name, Base) \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  };

RAYLEIGH_DEFINE_ERROR(DegenerateExtremumError, ValidationError)
RAYLEIGH_DEFINE_ERROR(DuplicateExtremalVelocityError, ValidationError)
RAYLEIGH_DEFINE_ERROR(NoRootError, NumericError)
RAYLEIGH_DEFINE_ERROR(MultiRootError, NumericError)
RAYLEIGH_DEFINE_ERROR(ExtremalVelocityError, NumericError)
RAYLEIGH_DEFINE_ERROR(TailError, NumericError)
RAYLEIGH_DEFINE_ERROR(QuadratureError, NumericError)
RAYLEIGH_DEFINE_ERROR(BranchError, NumericError)
RAYLEIGH_DEFINE_ERROR(NoContractionError, NumericError)
RAYLEIGH_DEFINE_ERROR(WindowError, ValidationError)
RAYLEIGH_DEFINE_ERROR(PoleError, NumericError)
RAYLEIGH_DEFINE_ERROR(BoundaryZeroError, NumericError)
RAYLEIGH_DEFINE_ERROR(NonSimpleError, AuditError)
RAYLEIGH_DEFINE_ERROR(A3ViolationError, AuditError)
RAYLEIGH_DEFINE_ERROR(EigenvalueError, NumericError)
RAYLEIGH_DEFINE_ERROR(ContourEigenvalueError, NumericError)
RAYLEIGH_DEFINE_ERROR(StepError, ValidationError)
RAYLEIGH_DEFINE_ERROR(SupportError, ValidationError)
RAYLEIGH_DEFINE_ERROR(ExtremalWindowError, NumericError)
RAYLEIGH_DEFINE_ERROR(PoorFitError, NumericError)

#undef RAYLEIGH_DEFINE_ERROR

}  // namespace rayleigh
