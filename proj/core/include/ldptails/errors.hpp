#pragma once

#include <stdexcept>
#include <string>

namespace ldptails {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A constructed object failed one of its checked invariants (for example a
/// Karamata epsilon table that does not vanish at infinity).
class InvariantViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Weights whose moment constants vanish numerically, so nu-th roots are
/// undefined.
class DegenerateSchemeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical routine did not reach its tolerance. `diagnostics()` carries the
/// routine-specific details (error estimate, interval, iteration count).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::string diagnostics)
      : std::runtime_error(what + ": " + diagnostics),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// Truncated power series left its trusted region.
class SeriesDomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Malformed structured-text input (unknown tag, missing field).
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ldptails
