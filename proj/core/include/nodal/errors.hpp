#pragma once

#include <stdexcept>
#include <string>

namespace nodal {

/// Argument outside the mathematical domain of an operation (non-finite input,
/// divergent integral, invalid dimension, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A root or shooting bracket does not contain a sign change / class change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShootingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed object violates an invariant that a correct computation guarantees.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nodal
