#pragma once

#include <stdexcept>
#include <string>

namespace monokit {

// Violated input contract (bad dimensions, malformed schema, precondition
// failure).  The CLI maps this family, together with std::invalid_argument
// and JSON parse errors, to exit code 2.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numeric routine failed to reach its tolerance or hit an iteration cap.
// CLI exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace monokit
