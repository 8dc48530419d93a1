#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mvsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when an input violates a stated precondition (non-finite values,
// off-grid times, mismatched sizes).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A point lies outside the closed domain by more than the tolerance.
class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Should be unreachable for well-formed operator specs.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad experiment configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace mvsde
