#include "sembox/oracle.hpp"

#include <cmath>

#include "sembox/errors.hpp"

namespace sembox {
namespace oracle {

namespace {

double shape1d(int bit, double t) { return bit ? 0.5 * (1.0 + t) : 0.5 * (1.0 - t); }
double dshape1d(int bit) { return bit ? 0.5 : -0.5; }

void invert3(const std::array<double, 9>& j, std::array<double, 9>& inv, double& det) {
  det = j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6]) +
        j[2] * (j[3] * j[7] - j[4] * j[6]);
  if (!(det > 0.0)) throw MeshError("oracle: nonpositive Jacobian");
  const double id = 1.0 / det;
  inv[0] = (j[4] * j[8] - j[5] * j[7]) * id;
  inv[1] = (j[2] * j[7] - j[1] * j[8]) * id;
  inv[2] = (j[1] * j[5] - j[2] * j[4]) * id;
  inv[3] = (j[5] * j[6] - j[3] * j[8]) * id;
  inv[4] = (j[0] * j[8] - j[2] * j[6]) * id;
  inv[5] = (j[2] * j[3] - j[0] * j[5]) * id;
  inv[6] = (j[3] * j[7] - j[4] * j[6]) * id;
  inv[7] = (j[1] * j[6] - j[0] * j[7]) * id;
  inv[8] = (j[0] * j[4] - j[1] * j[3]) * id;
}

// 1D Lagrange cardinal value and derivative by direct product formulas.
double lag_value(const std::vector<double>& nodes, int j, double x) {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (static_cast<int>(k) != j) v *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  return v;
}

double lag_deriv(const std::vector<double>& nodes, int j, double x) {
  double s = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (static_cast<int>(m) == j) continue;
    double t = 1.0 / (nodes[j] - nodes[m]);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (static_cast<int>(k) != j && k != m) t *= (x - nodes[k]) / (nodes[j] - nodes[k]);
    s += t;
  }
  return s;
}

} // namespace

std::array<double, 9> trilinear_jacobian(const HexMesh& mesh, int elem, double r, double s,
                                         double t) {
  std::array<double, 9> j{};
  for (int c = 0; c < 8; ++c) {
    const int b[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
    const double grad[3] = {dshape1d(b[0]) * shape1d(b[1], s) * shape1d(b[2], t),
                            shape1d(b[0], r) * dshape1d(b[1]) * shape1d(b[2], t),
                            shape1d(b[0], r) * shape1d(b[1], s) * dshape1d(b[2])};
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) j[p * 3 + q] += mesh.corners[elem][c][p] * grad[q];
  }
  return j;
}

std::array<double, 3> trilinear_point(const HexMesh& mesh, int elem, double r, double s,
                                      double t) {
  std::array<double, 3> x{};
  for (int c = 0; c < 8; ++c) {
    const int b[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
    const double w = shape1d(b[0], r) * shape1d(b[1], s) * shape1d(b[2], t);
    for (int p = 0; p < 3; ++p) x[p] += w * mesh.corners[elem][c][p];
  }
  return x;
}

std::vector<double> dense_helmholtz_element(const HexMesh& mesh, int elem,
                                            const SpectralBasis& basis, double h1,
                                            double h2) {
  const int n = basis.n();
  const int nn = n * n * n;
  std::vector<double> a(static_cast<std::size_t>(nn) * nn, 0.0);
  std::vector<std::array<double, 3>> gphys(nn);

  // Plain quadrature loop (the GLL collocation rule is the operator's own
  // quadrature): gradients of every cardinal at every node, O(n^6) reference.
  for (int kq = 0; kq < n; ++kq)
    for (int jq = 0; jq < n; ++jq)
      for (int iq = 0; iq < n; ++iq) {
        const auto jac = trilinear_jacobian(mesh, elem, basis.nodes[iq], basis.nodes[jq],
                                            basis.nodes[kq]);
        std::array<double, 9> inv;
        double det;
        invert3(jac, inv, det);
        const double w = basis.weights[iq] * basis.weights[jq] * basis.weights[kq] * det;

        for (int ka = 0; ka < n; ++ka)
          for (int ja = 0; ja < n; ++ja)
            for (int ia = 0; ia < n; ++ia) {
              const int aa = (ka * n + ja) * n + ia;
              const double gr = (ja == jq && ka == kq) ? basis.d(iq, ia) : 0.0;
              const double gs = (ia == iq && ka == kq) ? basis.d(jq, ja) : 0.0;
              const double gt = (ia == iq && ja == jq) ? basis.d(kq, ka) : 0.0;
              for (int d = 0; d < 3; ++d)
                gphys[aa][d] =
                    inv[0 * 3 + d] * gr + inv[1 * 3 + d] * gs + inv[2 * 3 + d] * gt;
            }
        for (int ra = 0; ra < nn; ++ra) {
          const auto& ga = gphys[ra];
          if (ga[0] == 0.0 && ga[1] == 0.0 && ga[2] == 0.0) continue;
          for (int rb = 0; rb < nn; ++rb) {
            const auto& gb = gphys[rb];
            const double dot = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
            if (dot != 0.0) a[static_cast<std::size_t>(ra) * nn + rb] += h1 * w * dot;
          }
        }
        const int q = (kq * n + jq) * n + iq;
        a[static_cast<std::size_t>(q) * nn + q] += h2 * w;
      }
  return a;
}

std::array<std::vector<double>, 3> dense_divergence_element(const HexMesh& mesh, int elem,
                                                            const SpectralBasis& basis,
                                                            const PressureBasis& pbasis) {
  const int n = basis.n(), m = pbasis.m();
  const int nn = n * n * n, mm = m * m * m;
  std::array<std::vector<double>, 3> out;
  for (auto& v : out) v.assign(static_cast<std::size_t>(mm) * nn, 0.0);

  // 1D cardinal values/derivatives of the velocity basis at GL points.
  std::vector<double> val(static_cast<std::size_t>(m) * n);
  std::vector<double> der(static_cast<std::size_t>(m) * n);
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < n; ++j) {
      val[a * n + j] = lag_value(basis.nodes, j, pbasis.nodes[a]);
      der[a * n + j] = lag_deriv(basis.nodes, j, pbasis.nodes[a]);
    }

  for (int kq = 0; kq < m; ++kq)
    for (int jq = 0; jq < m; ++jq)
      for (int iq = 0; iq < m; ++iq) {
        const auto jac = trilinear_jacobian(mesh, elem, pbasis.nodes[iq], pbasis.nodes[jq],
                                            pbasis.nodes[kq]);
        std::array<double, 9> inv;
        double det;
        invert3(jac, inv, det);
        const double w =
            pbasis.weights[iq] * pbasis.weights[jq] * pbasis.weights[kq] * det;
        const int q = (kq * m + jq) * m + iq;
        for (int ka = 0; ka < n; ++ka)
          for (int ja = 0; ja < n; ++ja)
            for (int ia = 0; ia < n; ++ia) {
              const int b = (ka * n + ja) * n + ia;
              const double gr = der[iq * n + ia] * val[jq * n + ja] * val[kq * n + ka];
              const double gs = val[iq * n + ia] * der[jq * n + ja] * val[kq * n + ka];
              const double gt = val[iq * n + ia] * val[jq * n + ja] * der[kq * n + ka];
              for (int d = 0; d < 3; ++d) {
                const double dphys =
                    inv[0 * 3 + d] * gr + inv[1 * 3 + d] * gs + inv[2 * 3 + d] * gt;
                out[d][static_cast<std::size_t>(q) * nn + b] += w * dphys;
              }
            }
      }
  return out;
}

} // namespace oracle
} // namespace sembox
