#pragma once

#include <stdexcept>
#include <string>

namespace biharm {

// Base class for all library failures that are not plain argument errors.
// Argument-domain violations (n <= 4, r < 0, ...) throw std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested computation has no object to compute in this (n, p) regime,
// e.g. shooting for p below the Sobolev exponent.
class RegimeError : public Error {
 public:
  using Error::Error;
};

// The stability condition fails, so the characteristic polynomial has a
// complex pair of roots.
class StabilityViolated : public Error {
 public:
  using Error::Error;
};

// An iterative procedure (bisection, bracketing, shooting) ran out of budget.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Adaptive step size fell below the resolvable increment at the current radius.
class StepUnderflow : public Error {
 public:
  using Error::Error;
};

}  // namespace biharm
