#ifndef SEMBOX_ERRORS_HPP
#define SEMBOX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sembox {

/// Bad user-provided configuration (CLI, config file, out-of-range parameters).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller broke an API precondition (grid mismatch, unbuilt object, ...).
class ContractViolation : public std::logic_error {
public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Geometry problems (nonpositive Jacobian, malformed mesh file).
class MeshError : public std::runtime_error {
public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solve produced NaN/Inf or exceeded hard limits.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

/// Direct factorization hit a nonpositive pivot.
class FactorizationError : public std::runtime_error {
public:
  FactorizationError(const std::string& what, int pivot_index)
      : std::runtime_error(what), pivot_index(pivot_index) {}
  int pivot_index;
};

} // namespace sembox

#endif
