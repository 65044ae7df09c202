#pragma once

#include <stdexcept>
#include <string>

namespace sfcsim {

// Base of everything the library throws. The CLI maps the two families below
// onto its exit codes (2 = input, 3 = numerical).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, malformed scenario documents, unreadable files.
class InputError : public Error {
 public:
  using Error::Error;
};

// Anything that goes wrong while computing: singular networks, degenerate
// formula denominators, non-converging load flow, integrator breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularNetwork : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InfeasibleLoad : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IntegrationFault : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sfcsim
