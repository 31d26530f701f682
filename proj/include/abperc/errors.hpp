#pragma once

#include <stdexcept>
#include <string>

namespace abperc {

/// Invalid argument combination supplied by the caller.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A bounded enumeration or allocation would exceed its guard.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo estimator could not produce an answer (e.g. the initial
/// bracket does not straddle the target probability).
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace abperc
