#pragma once

#include <stdexcept>
#include <string>

namespace spinmech {

// Base for everything thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operator/state dimensions or subsystem indices do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A parameter is outside its valid range (truncation < 2, negative rate, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Closed-form expression evaluated at a pole (e.g. resonance denominator).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Eigenstate labeling by overlap is ambiguous (best overlap below 1/2).
class LabelingError : public Error {
 public:
  using Error::Error;
};

// A stationary-state query found zero or several candidates.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Numerical propagation failed to meet its tolerance / budget; message
// carries diagnostics (step counts, achieved error).
class SolverError : public Error {
 public:
  using Error::Error;
};

// Correlation window too short for the requested spectrum.
class WindowError : public Error {
 public:
  using Error::Error;
};

// Peak fitting found no peak or several peaks in the search window.
class AmbiguousPeakError : public Error {
 public:
  using Error::Error;
};

// Finite-difference stencil straddles a level crossing.
class StencilError : public Error {
 public:
  using Error::Error;
};

// Interpolation query outside the tabulated range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Text input (config / profile / species file) failed to parse.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Config-level validation; message lists every violation found.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A computed object violated its numerical invariants (trace, positivity,
// CP/TP) beyond tolerance.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinmech
