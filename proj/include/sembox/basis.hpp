#ifndef SEMBOX_BASIS_HPP
#define SEMBOX_BASIS_HPP

#include <vector>

namespace sembox {

/// One-dimensional Gauss-Lobatto-Legendre machinery for polynomial order N:
/// collocation nodes, quadrature weights and the Lagrange derivative matrix.
/// Everything is immutable after construction and safe to share.
struct SpectralBasis {
  int order = 0;                 // polynomial degree N
  std::vector<double> nodes;     // N+1 GLL points, ascending, in [-1,1]
  std::vector<double> weights;   // N+1 quadrature weights, sum = 2
  std::vector<double> deriv;     // (N+1)^2 row-major, deriv[i][j] = l_j'(x_i)

  int n() const { return order + 1; }
  double d(int i, int j) const { return deriv[static_cast<std::size_t>(i) * n() + j]; }
};

/// Gauss-Legendre grid of order N-2 used for the pressure in the staggered
/// P_N / P_(N-2) formulation, plus the velocity-to-pressure interpolation.
struct PressureBasis {
  int order = 0;                 // N-2
  int velocity_order = 0;        // N
  std::vector<double> nodes;     // N-1 interior GL points
  std::vector<double> weights;   // N-1 weights, sum = 2
  std::vector<double> interp_v2p; // (N-1)x(N+1) row-major: l_j(gl_i)

  int m() const { return order + 1; }          // points per direction, N-1
  int nv() const { return velocity_order + 1; } // N+1
  double iv2p(int i, int j) const {
    return interp_v2p[static_cast<std::size_t>(i) * nv() + j];
  }
};

/// GLL nodes/weights/derivative matrix for degree N (1 <= N <= 32).
/// Nodes come from Newton iteration on (1-x^2) L_N'(x) with Chebyshev
/// initial guesses; the result is exactly symmetric about 0.
SpectralBasis build_gll_basis(int degree);

/// Lagrange derivative matrix for an arbitrary strictly increasing node set.
std::vector<double> build_deriv_matrix(const std::vector<double>& nodes);

/// GL pressure grid of degree N-2 for velocity degree N (N >= 3).
PressureBasis build_pressure_basis(int velocity_degree);

/// Evaluates every Lagrange cardinal of `nodes` at point x (barycentric).
std::vector<double> lagrange_eval(const std::vector<double>& nodes, double x);

} // namespace sembox

#endif
