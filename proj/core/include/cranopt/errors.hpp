#pragma once

#include <stdexcept>
#include <string>

namespace cranopt {

/// Shapes or counts that do not match the network configuration.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix left the domain of a log-det expression (singular or indefinite block).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No feasible starting point exists for an optimization problem.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem size exceeds an enumeration cap (subsets, permutations).
class CapacityExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace cranopt
