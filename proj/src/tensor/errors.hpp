#pragma once

#include <stdexcept>
#include <string>

namespace s2gsl {

// Bad input: malformed files, shape mismatches, out-of-range indices, bad config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, singular systems, diverged training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace s2gsl
