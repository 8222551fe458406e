#ifndef SEMBOX_KRYLOV_HPP
#define SEMBOX_KRYLOV_HPP

#include <deque>
#include <functional>
#include <vector>

#include "sembox/field.hpp"

namespace sembox {

using ApplyFn = std::function<void(const Field&, Field&)>;
using PrecondFn = std::function<void(const Field&, Field&)>;
using DotFn = std::function<double(const Field&, const Field&)>;
/// Called once per iteration with the current iterate and residual.
using PcgObserver = std::function<void(int, const Field&, const Field&)>;

struct KrylovConfig {
  double tolerance = 1e-8; // relative residual
  int max_iterations = 500;
  int projection_depth = 0; // history length for initial-guess projection
};

struct PcgResult {
  int iterations = 0;
  double rel_residual = 0.0;         // ||r|| / ||b||
  double rel_residual_precond = 0.0; // sqrt(r'Mr) / sqrt(b'Mb)
  bool converged = false;
  std::vector<double> residual_history; // relative plain residual per iteration
};

/// Preconditioned conjugate gradients for an SPD operator in the inner
/// product `dot` (pass a multiplicity-weighted dot for assembled velocity
/// fields, a plain dot for pressure fields). x carries the initial guess in
/// and the solution out. Convergence requires both the plain and the
/// preconditioned relative residual to drop below the tolerance. Reaching
/// max_iterations is reported, not fatal; NaN/Inf residuals throw.
PcgResult pcg(const ApplyFn& apply_a, const Field& b, const PrecondFn& precond,
              const DotFn& dot, const KrylovConfig& cfg, Field& x,
              const PcgObserver& observer = nullptr);

/// Initial-guess projection onto the span of previous solutions, kept
/// A-orthonormal in the inner product `dot`. One extra operator application
/// per appended solution.
class ProjectionHistory {
public:
  explicit ProjectionHistory(int depth) : depth_(depth) {}

  /// A-orthogonal projection of the solution onto the stored span:
  /// guess = sum_i (x_i . b) x_i. Optionally also returns b - A*guess.
  Field project_guess(const Field& b, const DotFn& dot, Field* deflated_rhs = nullptr) const;

  /// Append a converged solution; A-orthonormalizes it against the basis and
  /// evicts the oldest entry beyond the configured depth.
  void append(const Field& x, const ApplyFn& apply_a, const DotFn& dot);

  int size() const { return static_cast<int>(basis_.size()); }
  int depth() const { return depth_; }
  const std::deque<std::pair<Field, Field>>& entries() const { return basis_; }

private:
  int depth_;
  std::deque<std::pair<Field, Field>> basis_; // (x, A x), A-orthonormal
};

} // namespace sembox

#endif
