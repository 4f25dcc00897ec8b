#pragma once

#include <stdexcept>
#include <string>

namespace flowcouple {

/// Raised when a model document or network specification is malformed.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the numerical solvers (reducible chains, non-convergence, bad tolerances).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flowcouple
