#pragma once

#include <stdexcept>
#include <string>

namespace ulab {

// Argument violates an operation's contract.
struct invalid_argument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Result can no longer be trusted at working precision.
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation would exceed its configured work budget.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tie or near-tie that indicates precision failure rather than a valid input.
struct degenerate_input : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ulab
