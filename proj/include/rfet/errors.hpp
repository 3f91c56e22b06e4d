#pragma once

#include <stdexcept>
#include <string>

namespace rfet {

/// Argument outside the mathematical domain of an operation
/// (non-positive type, negative power, mismatched lengths, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The number of compositions C(n+k-1, k-1) exceeds the enumeration cap.
class EnumerationLimitError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// A numerical kernel produced NaN/Inf or failed to converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solved menu violates IR, IC or monotonicity.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfet
