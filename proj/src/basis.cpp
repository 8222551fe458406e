#include "sembox/basis.hpp"

#include <cmath>
#include <cstddef>

#include "sembox/errors.hpp"

namespace sembox {

namespace {

constexpr int kMaxDegree = 32;
constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  // derivative from the standard identity; endpoints handled separately below
  if (x == 1.0 || x == -1.0) {
    dp = 0.5 * n * (n + 1) * (x == 1.0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0));
  } else {
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  }
}

// Forces exact symmetry about the origin: x_i = -x_{n-1-i}.
void symmetrize(std::vector<double>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -m;
    x[n - 1 - i] = m;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> b(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) b[j] /= (nodes[j] - nodes[k]);
  return b;
}

} // namespace

SpectralBasis build_gll_basis(int degree) {
  if (degree < 1 || degree > kMaxDegree)
    throw ConfigError("build_gll_basis: degree must be in [1," +
                      std::to_string(kMaxDegree) + "], got " + std::to_string(degree));
  const int n = degree + 1;
  SpectralBasis basis;
  basis.order = degree;
  basis.nodes.assign(n, 0.0);
  basis.nodes[0] = -1.0;
  basis.nodes[n - 1] = 1.0;

  // Interior nodes are the roots of L_N'. Newton with Chebyshev-Lobatto
  // starting points; L_N'' comes from the Legendre ODE.
  for (int i = 1; i < degree; ++i) {
    double x = -std::cos(M_PI * i / degree);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      double p, dp;
      legendre(degree, x, p, dp);
      const double d2p = (2.0 * x * dp - degree * (degree + 1) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) <= kNewtonTol) break;
    }
    basis.nodes[i] = x;
  }
  symmetrize(basis.nodes);

  basis.weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double p, dp;
    legendre(degree, basis.nodes[i], p, dp);
    basis.weights[i] = 2.0 / (degree * (degree + 1) * p * p);
  }
  basis.deriv = build_deriv_matrix(basis.nodes);
  return basis;
}

std::vector<double> build_deriv_matrix(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  const std::vector<double> b = barycentric_weights(nodes);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double rowsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = (b[j] / b[i]) / (nodes[i] - nodes[j]);
      d[i * n + j] = v;
      rowsum += v;
    }
    d[i * n + i] = -rowsum; // rows sum to zero by construction
  }
  return d;
}

PressureBasis build_pressure_basis(int velocity_degree) {
  if (velocity_degree < 3)
    throw ConfigError("build_pressure_basis: velocity degree must be >= 3 "
                      "(no interior pressure grid below that), got " +
                      std::to_string(velocity_degree));
  const int m = velocity_degree - 1; // GL point count, polynomial order N-2
  PressureBasis pb;
  pb.order = velocity_degree - 2;
  pb.velocity_order = velocity_degree;
  pb.nodes.assign(m, 0.0);
  pb.weights.assign(m, 0.0);

  // Roots of L_m via Newton.
  for (int i = 0; i < m; ++i) {
    double x = -std::cos(M_PI * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      double p, dp;
      legendre(m, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= kNewtonTol) break;
    }
    pb.nodes[i] = x;
  }
  symmetrize(pb.nodes);
  for (int i = 0; i < m; ++i) {
    double p, dp;
    legendre(m, pb.nodes[i], p, dp);
    pb.weights[i] = 2.0 / ((1.0 - pb.nodes[i] * pb.nodes[i]) * dp * dp);
  }

  const SpectralBasis vb = build_gll_basis(velocity_degree);
  pb.interp_v2p.assign(static_cast<std::size_t>(m) * (velocity_degree + 1), 0.0);
  for (int i = 0; i < m; ++i) {
    const std::vector<double> row = lagrange_eval(vb.nodes, pb.nodes[i]);
    for (int j = 0; j <= velocity_degree; ++j)
      pb.interp_v2p[static_cast<std::size_t>(i) * (velocity_degree + 1) + j] = row[j];
  }
  return pb;
}

std::vector<double> lagrange_eval(const std::vector<double>& nodes, double x) {
  const std::size_t n = nodes.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (x == nodes[j]) { // exact node hit (e.g. shared origin for even N)
      out[j] = 1.0;
      return out;
    }
  }
  const std::vector<double> b = barycentric_weights(nodes);
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) denom += b[j] / (x - nodes[j]);
  for (std::size_t j = 0; j < n; ++j) out[j] = (b[j] / (x - nodes[j])) / denom;
  return out;
}

} // namespace sembox
