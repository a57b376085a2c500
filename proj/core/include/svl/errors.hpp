#pragma once

#include <stdexcept>
#include <string>

namespace svl {

// Base class for all library-specific failures. Precondition violations on
// plain arguments throw std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mean Hessian (or another required matrix) is not strictly positive definite.
class NotPositiveDefiniteError : public Error {
 public:
  explicit NotPositiveDefiniteError(const std::string& msg) : Error(msg) {}
};

// A characteristic root lies on or outside the unit circle.
class InstabilityError : public Error {
 public:
  explicit InstabilityError(const std::string& msg) : Error(msg) {}
};

// Parameters are outside the regime where a closed form exists; callers
// should fall back to quadrature.
class RegimeError : public Error {
 public:
  explicit RegimeError(const std::string& msg) : Error(msg) {}
};

// A simulated trajectory blew past the divergence guard.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

}  // namespace svl
