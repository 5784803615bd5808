#pragma once

#include <stdexcept>
#include <string>

namespace onedim {

// Bad arguments or malformed input data (unknown labels, loops in a graph,
// non-monotone spline data, values outside the manifold, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A documented precondition of an operation failed when checked numerically.
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Numerics gave up: non-convergence, nonpositive derivative of a supposed
// orientation-preserving map, inconsistent interval data.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace onedim
