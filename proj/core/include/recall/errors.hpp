#pragma once

#include <stdexcept>
#include <string>

namespace recall {

// Raised when an evaluation produces a non-finite value (loss blow-up,
// finite differences through a singularity, ...). CLI maps this to exit 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an explicit weight construction cannot be realized with the
// requested head dimension. CLI maps this to exit 4.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace recall
