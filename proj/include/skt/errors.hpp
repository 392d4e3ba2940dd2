#pragma once

#include <stdexcept>
#include <string>

namespace skt {

// Bad user-supplied data: wrong shapes, non-finite numbers, malformed config text.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A structural requirement on the model (positivity of coefficients, admissible
// coupling branch, sign conditions on the reaction) does not hold.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The nonlinear solve gave up: Newton stagnated after exhausting all time-step
// reductions, or a linear solve failed.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace skt
