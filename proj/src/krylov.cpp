#include "sembox/krylov.hpp"

#include <cmath>

namespace sembox {

PcgResult pcg(const ApplyFn& apply_a, const Field& b, const PrecondFn& precond,
              const DotFn& dot, const KrylovConfig& cfg, Field& x,
              const PcgObserver& observer) {
  PcgResult res;
  const double bb = dot(b, b);
  if (bb == 0.0) {
    field_fill(x, 0.0);
    res.converged = true;
    return res;
  }
  const double bnorm = std::sqrt(bb);

  Field r = b, z(b.tag, b.elem_count, b.n1d), q(b.tag, b.elem_count, b.n1d);
  if (!x.same_shape(b)) x = Field(b.tag, b.elem_count, b.n1d);

  // r = b - A x (skip the apply for a zero guess)
  bool zero_guess = true;
  for (double v : x.v)
    if (v != 0.0) {
      zero_guess = false;
      break;
    }
  if (!zero_guess) {
    apply_a(x, q);
    field_axpy(-1.0, q, r);
  }

  auto apply_precond = [&](const Field& in, Field& out) {
    if (precond)
      precond(in, out);
    else
      field_copy(in, out);
  };

  // Preconditioned norm of b for the relative preconditioned residual.
  apply_precond(b, z);
  const double bmb = dot(b, z);

  apply_precond(r, z);
  double rz = dot(r, z);
  double rnorm = std::sqrt(dot(r, r));
  res.residual_history.push_back(rnorm / bnorm);

  Field p = z;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.rel_residual = rnorm / bnorm;
    res.rel_residual_precond = bmb > 0.0 ? std::sqrt(std::max(rz, 0.0) / bmb) : 0.0;
    if (res.rel_residual <= cfg.tolerance && res.rel_residual_precond <= cfg.tolerance) {
      res.converged = true;
      return res;
    }

    apply_a(p, q);
    const double pq = dot(p, q);
    if (!std::isfinite(pq) || pq <= 0.0)
      throw SolverError("pcg: breakdown (p'Ap = " + std::to_string(pq) +
                            ") at iteration " + std::to_string(it),
                        it);
    const double alpha = rz / pq;
    field_axpy(alpha, p, x);
    field_axpy(-alpha, q, r);

    apply_precond(r, z);
    const double rz_new = dot(r, z);
    rnorm = std::sqrt(dot(r, r));
    if (!std::isfinite(rnorm) || !std::isfinite(rz_new))
      throw SolverError("pcg: residual diverged (NaN/Inf) at iteration " +
                            std::to_string(it),
                        it);
    res.residual_history.push_back(rnorm / bnorm);
    ++res.iterations;
    if (observer) observer(res.iterations, x, r);

    const double beta = rz_new / rz;
    rz = rz_new;
    // p = z + beta p
    field_scale(p, beta);
    field_axpy(1.0, z, p);
  }
  res.rel_residual = rnorm / bnorm;
  res.rel_residual_precond = bmb > 0.0 ? std::sqrt(std::max(rz, 0.0) / bmb) : 0.0;
  res.converged = res.rel_residual <= cfg.tolerance &&
                  res.rel_residual_precond <= cfg.tolerance;
  return res;
}

Field ProjectionHistory::project_guess(const Field& b, const DotFn& dot,
                                       Field* deflated_rhs) const {
  Field guess(b.tag, b.elem_count, b.n1d);
  if (deflated_rhs) field_copy(b, *deflated_rhs);
  if (basis_.empty()) return guess;
  for (const auto& [xb, yb] : basis_) {
    const double alpha = dot(xb, b);
    field_axpy(alpha, xb, guess);
    if (deflated_rhs) field_axpy(-alpha, yb, *deflated_rhs);
  }
  return guess;
}

void ProjectionHistory::append(const Field& x, const ApplyFn& apply_a, const DotFn& dot) {
  if (depth_ <= 0) return;
  Field v = x;
  Field w(x.tag, x.elem_count, x.n1d);
  apply_a(x, w);
  const double scale = dot(v, w); // x'Ax before orthogonalization
  for (const auto& [xb, yb] : basis_) {
    const double c = dot(xb, w);
    field_axpy(-c, xb, v);
    field_axpy(-c, yb, w);
  }
  const double d = dot(v, w);
  if (!(d > scale * 1e-24) || !std::isfinite(d)) return; // linearly dependent
  const double inv = 1.0 / std::sqrt(d);
  field_scale(v, inv);
  field_scale(w, inv);
  basis_.push_back({std::move(v), std::move(w)});
  while (static_cast<int>(basis_.size()) > depth_) basis_.pop_front();
}

} // namespace sembox
