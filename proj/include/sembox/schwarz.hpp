#ifndef SEMBOX_SCHWARZ_HPP
#define SEMBOX_SCHWARZ_HPP

#include <memory>
#include <vector>

#include "sembox/basis.hpp"
#include "sembox/field.hpp"
#include "sembox/gather.hpp"
#include "sembox/mesh.hpp"
#include "sembox/operators.hpp"
#include "sembox/xxt.hpp"

namespace sembox {

struct SchwarzOptions {
  bool use_coarse = true;
  /// The operator has the constant null space (fully periodic stiffness);
  /// one coarse dof (and one dof of any boundary-less subdomain) is pinned.
  bool has_nullspace = false;
};

/// Additive overlapping Schwarz preconditioner: per-rank subdomains (owned
/// elements plus one layer of face neighbors) with homogeneous Dirichlet on
/// the overlap boundary, factored local operators, and a vertex coarse space
/// solved through the XXT factorization. Symmetric under the weighted
/// (velocity) inner product via square-root overlap weighting.
class SchwarzPreconditioner {
public:
  SchwarzPreconditioner() = default;

  bool built() const { return impl_ != nullptr; }
  int subdomain_count() const;
  /// Sum over subdomains of the overlap weight at each global dof:
  /// 1 at every free dof (partition of unity), 0 at Dirichlet-masked dofs.
  std::vector<double> overlap_weight_sums() const;
  /// Columns of X in the coarse factor (fill metric).
  std::int64_t coarse_factor_nnz() const;

  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

SchwarzPreconditioner build_schwarz(const HexMesh& mesh, const SpectralBasis& basis,
                                    const GeometricFactors& gf,
                                    const GatherScatterMap& map, const Field* mask,
                                    const Partition& partition,
                                    const HelmholtzCoeffs& coeffs,
                                    const SchwarzOptions& options = {});

/// Element-vertex coarse space: trilinear hat columns on the global dofs and
/// the Galerkin operator A0 they induce. pin_constant drops the first vertex
/// (null-space handling for fully periodic operators). Empty (a0.n == 0)
/// when every vertex is masked.
struct VertexCoarseSpace {
  SparseSpd a0;
  std::vector<std::vector<std::pair<std::int64_t, double>>> columns; // (gid, hat)
};
VertexCoarseSpace build_vertex_coarse_space(const HexMesh& mesh,
                                            const SpectralBasis& basis,
                                            const GeometricFactors& gf,
                                            const GatherScatterMap& map,
                                            const Field* mask,
                                            const HelmholtzCoeffs& coeffs,
                                            bool pin_constant);

/// z = R0' A0^-1 R0 r + sum_k Rk' Ak^-1 Rk r on a continuous velocity-grid
/// field (overlap weighting applied on both sides of the local solves).
Field apply_schwarz(const SchwarzPreconditioner& pre, const Field& r);

/// Pressure-grid wrap: moves the residual to the velocity grid with the
/// transpose of the P_N -> P_(N-2) interpolation, applies the velocity-grid
/// preconditioner, and interpolates back. Symmetric under plain dots.
Field apply_schwarz_pressure(const SchwarzPreconditioner& pre, const Field& r,
                             const PressureBasis& pbasis);

} // namespace sembox

#endif
