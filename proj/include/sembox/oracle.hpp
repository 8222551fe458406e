#ifndef SEMBOX_ORACLE_HPP
#define SEMBOX_ORACLE_HPP

#include <array>
#include <vector>

#include "sembox/basis.hpp"
#include "sembox/mesh.hpp"

namespace sembox {

/// Reference (dense, quadrature-loop) assemblies of the element operators.
/// These deliberately avoid the tensor-contraction kernels: they exist to
/// cross-check them, in the validate command and in the test suites.
namespace oracle {

/// Dense element Helmholtz matrix (n^3 x n^3, row-major): for each
/// quadrature node, h1 * (J^-T grad l_a) . (J^-T grad l_b) * w detJ, plus the
/// diagonal h2 mass.
std::vector<double> dense_helmholtz_element(const HexMesh& mesh, int elem,
                                            const SpectralBasis& basis, double h1,
                                            double h2);

/// Dense weak-divergence blocks (m^3 x n^3 per velocity component): GL-point
/// quadrature of psi_q * du_d/dx_d with the chain rule applied at GL points.
std::array<std::vector<double>, 3> dense_divergence_element(const HexMesh& mesh, int elem,
                                                            const SpectralBasis& basis,
                                                            const PressureBasis& pbasis);

/// Jacobian dx_p/dxi_q of the trilinear map at a reference point.
std::array<double, 9> trilinear_jacobian(const HexMesh& mesh, int elem, double r,
                                         double s, double t);
std::array<double, 3> trilinear_point(const HexMesh& mesh, int elem, double r, double s,
                                      double t);

} // namespace oracle
} // namespace sembox

#endif
