#pragma once

#include <stdexcept>
#include <string>

namespace rabi {

// Bad input: a precondition on a parameter does not hold.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A solver or quadrature could not meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration that cannot be turned into a consistent scenario.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rabi
