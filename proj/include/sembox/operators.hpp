#ifndef SEMBOX_OPERATORS_HPP
#define SEMBOX_OPERATORS_HPP

#include <atomic>
#include <vector>

#include "sembox/basis.hpp"
#include "sembox/field.hpp"
#include "sembox/gather.hpp"
#include "sembox/mesh.hpp"

namespace sembox {

/// Per-node metric data on the velocity (GLL) grid. g1..g3 are the diagonal
/// and g4..g6 the off-diagonal entries of w * detJ * J^-1 J^-T; bm is the
/// collocation mass (w * detJ). drdx holds the nine dxi_p/dx_q entries per
/// node when gradients are requested.
struct GeometricFactors {
  int elem_count = 0;
  int n1d = 0;
  bool has_gradients = false;
  std::vector<double> g1, g2, g3, g4, g5, g6;
  std::vector<double> bm;
  std::vector<double> jac;   // detJ samples
  std::vector<double> drdx;  // 9 per node, [p*3+q] = dxi_p/dx_q
};

/// Same metric data sampled on the pressure (GL) grid, used by the
/// divergence/gradient pair.
struct PressureGeometry {
  int elem_count = 0;
  int m1d = 0;               // N-1
  std::vector<double> wdetj; // GL weight * detJ per node
  std::vector<double> drdx;  // 9 per node
};

/// Helmholtz weights: w = h1 * (stiffness u) + h2 * (mass u). Scalars by
/// default; optional per-node fields override them.
struct HelmholtzCoeffs {
  double h1 = 1.0;
  double h2 = 0.0;
  const Field* h1_field = nullptr;
  const Field* h2_field = nullptr;
};

GeometricFactors build_geometric_factors(const HexMesh& mesh,
                                         const SpectralBasis& basis,
                                         bool with_gradients = true);

PressureGeometry build_pressure_geometry(const HexMesh& mesh,
                                         const PressureBasis& pbasis);

/// Element-local Helmholtz operator: the two tensor-contraction sweeps
/// (D along r,s,t; metric combination; D^T back), plus the mass term.
/// No gather and no boundary handling here; the assembled operator is
/// mask(gs_sum(axhelm(u))).
Field axhelm(const Field& u, const HelmholtzCoeffs& coeffs,
             const GeometricFactors& gf, const SpectralBasis& basis);
void axhelm(const Field& u, const HelmholtzCoeffs& coeffs,
            const GeometricFactors& gf, const SpectralBasis& basis, Field& out);

/// Diagonal of the element-local operator (for Jacobi preconditioning;
/// assemble with gs_sum).
Field axhelm_diagonal(const HelmholtzCoeffs& coeffs, const GeometricFactors& gf,
                      const SpectralBasis& basis);

/// Physical-space gradient at the velocity nodes (chain rule with drdx).
VectorField grad_velocity(const Field& u, const GeometricFactors& gf,
                          const SpectralBasis& basis);

/// Weak divergence onto the pressure grid: reference derivatives on the GLL
/// grid, interpolated to GL points, combined with the GL metric and weights.
Field divergence_to_pressure(const Field& ux, const Field& uy, const Field& uz,
                             const PressureGeometry& pg, const SpectralBasis& basis,
                             const PressureBasis& pbasis);

/// Exact transpose of divergence_to_pressure under plain (unweighted) dots.
VectorField gradient_from_pressure(const Field& p, const PressureGeometry& pg,
                                   const SpectralBasis& basis,
                                   const PressureBasis& pbasis);

/// Convective term: bm * (c . grad) u per component, pointwise on the GLL
/// grid (no dealiasing).
VectorField advect(const VectorField& u, const VectorField& c,
                   const GeometricFactors& gf, const SpectralBasis& basis);

/// 0/1 velocity-grid field: 0 on every non-periodic domain boundary node.
Field build_dirichlet_mask(const HexMesh& mesh, int degree);

/// Interpolation of a velocity-grid field to the pressure grid, and its
/// plain transpose (pressure to velocity grid). Element-local tensor ops.
Field interp_to_pressure(const Field& u, const PressureBasis& pbasis);
Field interp_to_pressure_transpose(const Field& p, const PressureBasis& pbasis);

/// Dense element matrix of the local operator (n^3 x n^3, row-major), built
/// by applying axhelm to unit vectors. Used for subdomain/coarse assembly.
std::vector<double> element_matrix(int elem, const HelmholtzCoeffs& coeffs,
                                   const GeometricFactors& gf,
                                   const SpectralBasis& basis);

/// Assembled operator A(u) = mask(gs_sum(axhelm(u))), symmetric in the
/// 1/multiplicity inner product on masked continuous fields.
struct HelmholtzOperator {
  const GeometricFactors* gf = nullptr;
  const SpectralBasis* basis = nullptr;
  const GatherScatterMap* map = nullptr;
  const Field* mask = nullptr; // optional
  HelmholtzCoeffs coeffs;

  void apply(const Field& x, Field& out) const;
  Field assembled_diagonal() const; // gs_sum of the local diagonal
};

namespace debug {
/// Test hook for the validate mutation fixture: flips the sign of the
/// t-direction contribution in axhelm's second sweep.
extern std::atomic<bool> axhelm_sign_flip;
} // namespace debug

} // namespace sembox

#endif
