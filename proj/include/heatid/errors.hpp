#pragma once

#include <stdexcept>
#include <string>

namespace heatid {

/// Bad input: malformed config or data, violated model invariants,
/// inconsistent dimensions. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure broke down (singular innovation covariance,
/// integration blow-up, ...). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heatid
