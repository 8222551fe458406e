#include "sembox/operators.hpp"

#include <array>
#include <cmath>

#include "sembox/parallel.hpp"

namespace sembox {

namespace debug {
std::atomic<bool> axhelm_sign_flip{false};
}

namespace {

// Trilinear mapping of one element: x(xi) and the Jacobian dx_p/dxi_q.
struct TrilinearMap {
  const std::array<std::array<double, 3>, 8>* corners;

  void jacobian(double r, double s, double t, std::array<double, 9>& jac) const {
    const double phi[3][2] = {{0.5 * (1 - r), 0.5 * (1 + r)},
                              {0.5 * (1 - s), 0.5 * (1 + s)},
                              {0.5 * (1 - t), 0.5 * (1 + t)}};
    for (double& v : jac) v = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int b[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
      const double dphi[3] = {b[0] ? 0.5 : -0.5, b[1] ? 0.5 : -0.5, b[2] ? 0.5 : -0.5};
      for (int p = 0; p < 3; ++p) {
        const auto& x = (*corners)[c];
        double grad[3];
        grad[0] = dphi[0] * phi[1][b[1]] * phi[2][b[2]];
        grad[1] = phi[0][b[0]] * dphi[1] * phi[2][b[2]];
        grad[2] = phi[0][b[0]] * phi[1][b[1]] * dphi[2];
        for (int q = 0; q < 3; ++q) jac[p * 3 + q] += x[p] * grad[q];
      }
    }
  }
};

double det3(const std::array<double, 9>& j) {
  return j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6]) +
         j[2] * (j[3] * j[7] - j[4] * j[6]);
}

// inv[p][q] = dxi_p/dx_q for jac[p][q] = dx_p/dxi_q.
void inv3(const std::array<double, 9>& j, double det, std::array<double, 9>& inv) {
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

// Reference-space derivative sweeps for one element, in[n^3] -> ur/us/ut.
void ref_derivatives(const double* in, const double* d, int n, double* ur, double* us,
                     double* ut) {
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double rtmp = 0.0, stmp = 0.0, ttmp = 0.0;
        for (int l = 0; l < n; ++l) {
          rtmp += d[i * n + l] * in[(k * n + j) * n + l];
          stmp += d[j * n + l] * in[(k * n + l) * n + i];
          ttmp += d[k * n + l] * in[(l * n + j) * n + i];
        }
        const int a = (k * n + j) * n + i;
        ur[a] = rtmp;
        us[a] = stmp;
        ut[a] = ttmp;
      }
}

// Interpolates one direction: out[a,...] = sum_i M[a*n+i] * in[i,...].
// in has na points along `dir`, out gets nb points; other dims are n0,n1.
void contract_dir(const double* in, double* out, const double* m, int nb, int na,
                  int dim0, int dim1, int dir) {
  // dims of in: dir-th extent na, others dim0 (fastest of the remaining) and
  // dim1. We work with explicit loops per dir for clarity.
  if (dir == 0) {
    for (int k = 0; k < dim1; ++k)
      for (int j = 0; j < dim0; ++j)
        for (int a = 0; a < nb; ++a) {
          double s = 0.0;
          for (int i = 0; i < na; ++i) s += m[a * na + i] * in[(k * dim0 + j) * na + i];
          out[(k * dim0 + j) * nb + a] = s;
        }
  } else if (dir == 1) {
    for (int k = 0; k < dim1; ++k)
      for (int a = 0; a < nb; ++a)
        for (int i = 0; i < dim0; ++i) {
          double s = 0.0;
          for (int j = 0; j < na; ++j) s += m[a * na + j] * in[(k * na + j) * dim0 + i];
          out[(k * nb + a) * dim0 + i] = s;
        }
  } else {
    for (int a = 0; a < nb; ++a)
      for (int j = 0; j < dim1; ++j)
        for (int i = 0; i < dim0; ++i) {
          double s = 0.0;
          for (int k = 0; k < na; ++k) s += m[a * na + k] * in[(k * dim1 + j) * dim0 + i];
          out[(a * dim1 + j) * dim0 + i] = s;
        }
  }
}

// Full 3D tensor interpolation with matrix m (nb x na) along all directions.
void interp3(const double* in, double* out, const double* m, int nb, int na) {
  // x: (na,na,na) -> (nb,na,na); y: -> (nb,nb,na); z: -> (nb,nb,nb)
  std::vector<double> t1(static_cast<std::size_t>(nb) * na * na);
  contract_dir(in, t1.data(), m, nb, na, /*dim0*/ na, /*dim1*/ na, 0);
  std::vector<double> t2(static_cast<std::size_t>(nb) * nb * na);
  contract_dir(t1.data(), t2.data(), m, nb, na, nb, na, 1);
  contract_dir(t2.data(), out, m, nb, na, nb, nb, 2);
}

} // namespace

GeometricFactors build_geometric_factors(const HexMesh& mesh, const SpectralBasis& basis,
                                         bool with_gradients) {
  const int n = basis.n();
  const std::int64_t nodes = static_cast<std::int64_t>(mesh.elem_count) * n * n * n;
  GeometricFactors gf;
  gf.elem_count = mesh.elem_count;
  gf.n1d = n;
  gf.has_gradients = with_gradients;
  gf.g1.assign(nodes, 0.0);
  gf.g2.assign(nodes, 0.0);
  gf.g3.assign(nodes, 0.0);
  gf.g4.assign(nodes, 0.0);
  gf.g5.assign(nodes, 0.0);
  gf.g6.assign(nodes, 0.0);
  gf.bm.assign(nodes, 0.0);
  gf.jac.assign(nodes, 0.0);
  if (with_gradients) gf.drdx.assign(nodes * 9, 0.0);

  std::atomic<int> bad_elem{-1};
  parallel_for(mesh.elem_count, [&](std::int64_t e) {
    TrilinearMap map{&mesh.corners[e]};
    std::int64_t a = e * n * n * n;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i, ++a) {
          std::array<double, 9> jac, inv;
          map.jacobian(basis.nodes[i], basis.nodes[j], basis.nodes[k], jac);
          const double det = det3(jac);
          if (!(det > 0.0)) {
            bad_elem.store(static_cast<int>(e));
            return;
          }
          inv3(jac, det, inv);
          const double w = basis.weights[i] * basis.weights[j] * basis.weights[k];
          const double wd = w * det;
          auto gdot = [&](int p, int q) {
            return wd * (inv[p * 3 + 0] * inv[q * 3 + 0] + inv[p * 3 + 1] * inv[q * 3 + 1] +
                         inv[p * 3 + 2] * inv[q * 3 + 2]);
          };
          gf.g1[a] = gdot(0, 0);
          gf.g2[a] = gdot(1, 1);
          gf.g3[a] = gdot(2, 2);
          gf.g4[a] = gdot(0, 1);
          gf.g5[a] = gdot(0, 2);
          gf.g6[a] = gdot(1, 2);
          gf.bm[a] = wd;
          gf.jac[a] = det;
          if (with_gradients)
            for (int p = 0; p < 9; ++p) gf.drdx[a * 9 + p] = inv[p];
        }
  });
  if (bad_elem.load() >= 0)
    throw MeshError("build_geometric_factors: nonpositive Jacobian in element " +
                    std::to_string(bad_elem.load()));
  return gf;
}

PressureGeometry build_pressure_geometry(const HexMesh& mesh,
                                         const PressureBasis& pbasis) {
  const int m = pbasis.m();
  const std::int64_t nodes = static_cast<std::int64_t>(mesh.elem_count) * m * m * m;
  PressureGeometry pg;
  pg.elem_count = mesh.elem_count;
  pg.m1d = m;
  pg.wdetj.assign(nodes, 0.0);
  pg.drdx.assign(nodes * 9, 0.0);

  std::atomic<int> bad_elem{-1};
  parallel_for(mesh.elem_count, [&](std::int64_t e) {
    TrilinearMap map{&mesh.corners[e]};
    std::int64_t a = e * m * m * m;
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i, ++a) {
          std::array<double, 9> jac, inv;
          map.jacobian(pbasis.nodes[i], pbasis.nodes[j], pbasis.nodes[k], jac);
          const double det = det3(jac);
          if (!(det > 0.0)) {
            bad_elem.store(static_cast<int>(e));
            return;
          }
          inv3(jac, det, inv);
          pg.wdetj[a] = pbasis.weights[i] * pbasis.weights[j] * pbasis.weights[k] * det;
          for (int p = 0; p < 9; ++p) pg.drdx[a * 9 + p] = inv[p];
        }
  });
  if (bad_elem.load() >= 0)
    throw MeshError("build_pressure_geometry: nonpositive Jacobian in element " +
                    std::to_string(bad_elem.load()));
  return pg;
}

void axhelm(const Field& u, const HelmholtzCoeffs& coeffs, const GeometricFactors& gf,
            const SpectralBasis& basis, Field& out) {
  const int n = basis.n();
  require_shape(u, GridTag::velocity, gf.elem_count, n, "axhelm");
  if (!out.same_shape(u)) out = Field(GridTag::velocity, gf.elem_count, n);
  const double* d = basis.deriv.data();
  const bool flip = debug::axhelm_sign_flip.load(std::memory_order_relaxed);
  const double tsign = flip ? -1.0 : 1.0;

  parallel_for_ranges(gf.elem_count, [&](std::int64_t eb, std::int64_t ee) {
    std::vector<double> wr(n * n * n), ws(n * n * n), wt(n * n * n);
    for (std::int64_t e = eb; e < ee; ++e) {
      const std::int64_t base = e * n * n * n;
      const double* ue = u.v.data() + base;
      double* oe = out.v.data() + base;
      // first sweep: reference derivatives + metric combination
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            double rtmp = 0.0, stmp = 0.0, ttmp = 0.0;
            for (int l = 0; l < n; ++l) {
              rtmp += d[i * n + l] * ue[(k * n + j) * n + l];
              stmp += d[j * n + l] * ue[(k * n + l) * n + i];
              ttmp += d[k * n + l] * ue[(l * n + j) * n + i];
            }
            const std::int64_t a = base + (k * n + j) * n + i;
            const int la = (k * n + j) * n + i;
            const double h1 = coeffs.h1_field ? coeffs.h1_field->v[a] : coeffs.h1;
            wr[la] = (gf.g1[a] * rtmp + gf.g4[a] * stmp + gf.g5[a] * ttmp) * h1;
            ws[la] = (gf.g2[a] * stmp + gf.g4[a] * rtmp + gf.g6[a] * ttmp) * h1;
            wt[la] = (gf.g3[a] * ttmp + gf.g5[a] * rtmp + gf.g6[a] * stmp) * h1;
          }
      // second sweep: transposed derivatives + mass term
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l) {
              acc += d[l * n + i] * wr[(k * n + j) * n + l] +
                     d[l * n + j] * ws[(k * n + l) * n + i] +
                     tsign * d[l * n + k] * wt[(l * n + j) * n + i];
            }
            const std::int64_t a = base + (k * n + j) * n + i;
            const double h2 = coeffs.h2_field ? coeffs.h2_field->v[a] : coeffs.h2;
            oe[(k * n + j) * n + i] = acc + h2 * gf.bm[a] * ue[(k * n + j) * n + i];
          }
    }
  });
}

Field axhelm(const Field& u, const HelmholtzCoeffs& coeffs, const GeometricFactors& gf,
             const SpectralBasis& basis) {
  Field out(GridTag::velocity, gf.elem_count, basis.n());
  axhelm(u, coeffs, gf, basis, out);
  return out;
}

Field axhelm_diagonal(const HelmholtzCoeffs& coeffs, const GeometricFactors& gf,
                      const SpectralBasis& basis) {
  const int n = basis.n();
  Field diag(GridTag::velocity, gf.elem_count, n);
  const double* d = basis.deriv.data();
  parallel_for(gf.elem_count, [&](std::int64_t e) {
    const std::int64_t base = e * n * n * n;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::int64_t a = base + (k * n + j) * n + i;
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += d[l * n + i] * d[l * n + i] * gf.g1[base + (k * n + j) * n + l];
            s += d[l * n + j] * d[l * n + j] * gf.g2[base + (k * n + l) * n + i];
            s += d[l * n + k] * d[l * n + k] * gf.g3[base + (l * n + j) * n + i];
          }
          s += 2.0 * d[i * n + i] * d[j * n + j] * gf.g4[a];
          s += 2.0 * d[i * n + i] * d[k * n + k] * gf.g5[a];
          s += 2.0 * d[j * n + j] * d[k * n + k] * gf.g6[a];
          const double h1 = coeffs.h1_field ? coeffs.h1_field->v[a] : coeffs.h1;
          const double h2 = coeffs.h2_field ? coeffs.h2_field->v[a] : coeffs.h2;
          diag.v[a] = h1 * s + h2 * gf.bm[a];
        }
  });
  return diag;
}

VectorField grad_velocity(const Field& u, const GeometricFactors& gf,
                          const SpectralBasis& basis) {
  const int n = basis.n();
  require_shape(u, GridTag::velocity, gf.elem_count, n, "grad_velocity");
  if (!gf.has_gradients)
    throw ContractViolation("grad_velocity: geometric factors built without gradients");
  VectorField out{Field(GridTag::velocity, gf.elem_count, n),
                  Field(GridTag::velocity, gf.elem_count, n),
                  Field(GridTag::velocity, gf.elem_count, n)};
  const double* d = basis.deriv.data();
  parallel_for_ranges(gf.elem_count, [&](std::int64_t eb, std::int64_t ee) {
    std::vector<double> ur(n * n * n), us(n * n * n), ut(n * n * n);
    for (std::int64_t e = eb; e < ee; ++e) {
      const std::int64_t base = e * n * n * n;
      ref_derivatives(u.v.data() + base, d, n, ur.data(), us.data(), ut.data());
      for (int a = 0; a < n * n * n; ++a) {
        const std::int64_t g = (base + a) * 9;
        const double dr = ur[a], ds = us[a], dt = ut[a];
        for (int q = 0; q < 3; ++q)
          out[q].v[base + a] =
              gf.drdx[g + 0 + q] * dr + gf.drdx[g + 3 + q] * ds + gf.drdx[g + 6 + q] * dt;
      }
    }
  });
  return out;
}

Field divergence_to_pressure(const Field& ux, const Field& uy, const Field& uz,
                             const PressureGeometry& pg, const SpectralBasis& basis,
                             const PressureBasis& pbasis) {
  const int n = basis.n(), m = pbasis.m();
  require_shape(ux, GridTag::velocity, pg.elem_count, n, "divergence_to_pressure");
  require_shape(uy, GridTag::velocity, pg.elem_count, n, "divergence_to_pressure");
  require_shape(uz, GridTag::velocity, pg.elem_count, n, "divergence_to_pressure");
  Field out(GridTag::pressure, pg.elem_count, m);
  const double* d = basis.deriv.data();
  const double* iv = pbasis.interp_v2p.data();
  const std::array<const Field*, 3> u{&ux, &uy, &uz};

  parallel_for_ranges(pg.elem_count, [&](std::int64_t eb, std::int64_t ee) {
    std::vector<double> ur(n * n * n), us(n * n * n), ut(n * n * n);
    std::vector<double> gl(m * m * m);
    for (std::int64_t e = eb; e < ee; ++e) {
      const std::int64_t vbase = e * n * n * n;
      const std::int64_t pbase = e * m * m * m;
      double* oe = out.v.data() + pbase;
      for (int comp = 0; comp < 3; ++comp) {
        ref_derivatives(u[comp]->v.data() + vbase, d, n, ur.data(), us.data(), ut.data());
        const double* refd[3] = {ur.data(), us.data(), ut.data()};
        for (int p = 0; p < 3; ++p) {
          interp3(refd[p], gl.data(), iv, m, n);
          for (int a = 0; a < m * m * m; ++a) {
            const std::int64_t g = (pbase + a) * 9;
            oe[a] += pg.wdetj[pbase + a] * pg.drdx[g + p * 3 + comp] * gl[a];
          }
        }
      }
    }
  });
  return out;
}

VectorField gradient_from_pressure(const Field& p, const PressureGeometry& pg,
                                   const SpectralBasis& basis,
                                   const PressureBasis& pbasis) {
  const int n = basis.n(), m = pbasis.m();
  require_shape(p, GridTag::pressure, pg.elem_count, m, "gradient_from_pressure");
  VectorField out{Field(GridTag::velocity, pg.elem_count, n),
                  Field(GridTag::velocity, pg.elem_count, n),
                  Field(GridTag::velocity, pg.elem_count, n)};
  const double* d = basis.deriv.data();
  const int nv = pbasis.nv();

  // Transposed interpolation matrix (n x m), built once.
  std::vector<double> ivt(static_cast<std::size_t>(n) * m);
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < n; ++j) ivt[j * m + a] = pbasis.interp_v2p[a * nv + j];

  parallel_for_ranges(pg.elem_count, [&](std::int64_t eb, std::int64_t ee) {
    std::vector<double> tmp(m * m * m), vel(n * n * n);
    for (std::int64_t e = eb; e < ee; ++e) {
      const std::int64_t vbase = e * n * n * n;
      const std::int64_t pbase = e * m * m * m;
      const double* pe = p.v.data() + pbase;
      for (int comp = 0; comp < 3; ++comp) {
        double* oe = out[comp].v.data() + vbase;
        for (int pd = 0; pd < 3; ++pd) {
          for (int a = 0; a < m * m * m; ++a) {
            const std::int64_t g = (pbase + a) * 9;
            tmp[a] = pg.wdetj[pbase + a] * pg.drdx[g + pd * 3 + comp] * pe[a];
          }
          interp3(tmp.data(), vel.data(), ivt.data(), n, m);
          // transposed derivative along pd: out(i) += sum_l d[l][i] vel(l)
          for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
              for (int i = 0; i < n; ++i) {
                double s = 0.0;
                if (pd == 0)
                  for (int l = 0; l < n; ++l) s += d[l * n + i] * vel[(k * n + j) * n + l];
                else if (pd == 1)
                  for (int l = 0; l < n; ++l) s += d[l * n + j] * vel[(k * n + l) * n + i];
                else
                  for (int l = 0; l < n; ++l) s += d[l * n + k] * vel[(l * n + j) * n + i];
                oe[(k * n + j) * n + i] += s;
              }
        }
      }
    }
  });
  return out;
}

VectorField advect(const VectorField& u, const VectorField& c, const GeometricFactors& gf,
                   const SpectralBasis& basis) {
  const int n = basis.n();
  for (int q = 0; q < 3; ++q) {
    require_shape(u[q], GridTag::velocity, gf.elem_count, n, "advect");
    require_shape(c[q], GridTag::velocity, gf.elem_count, n, "advect");
  }
  VectorField out{Field(GridTag::velocity, gf.elem_count, n),
                  Field(GridTag::velocity, gf.elem_count, n),
                  Field(GridTag::velocity, gf.elem_count, n)};
  for (int comp = 0; comp < 3; ++comp) {
    const VectorField g = grad_velocity(u[comp], gf, basis);
    parallel_for_ranges(out[comp].size(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t a = lo; a < hi; ++a)
        out[comp].v[a] =
            gf.bm[a] * (c[0].v[a] * g[0].v[a] + c[1].v[a] * g[1].v[a] + c[2].v[a] * g[2].v[a]);
    });
  }
  return out;
}

Field build_dirichlet_mask(const HexMesh& mesh, int degree) {
  if (!mesh.structured())
    throw ContractViolation("build_dirichlet_mask: requires a structured mesh");
  const int n = degree + 1;
  Field mask(GridTag::velocity, mesh.elem_count, n);
  field_fill(mask, 1.0);
  const std::array<int, 3> counts{mesh.ex, mesh.ey, mesh.ez};
  parallel_for(mesh.elem_count, [&](std::int64_t e) {
    const auto cell = mesh.elem_coords(static_cast<int>(e));
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::array<int, 3> loc{i, j, k};
          for (int dd = 0; dd < 3; ++dd) {
            if (mesh.periodic[dd]) continue;
            const std::int64_t g = static_cast<std::int64_t>(cell[dd]) * degree + loc[dd];
            if (g == 0 || g == static_cast<std::int64_t>(counts[dd]) * degree)
              mask.at(static_cast<int>(e), i, j, k) = 0.0;
          }
        }
  });
  return mask;
}

Field interp_to_pressure(const Field& u, const PressureBasis& pbasis) {
  const int n = pbasis.nv(), m = pbasis.m();
  if (u.tag != GridTag::velocity || u.n1d != n)
    throw ContractViolation("interp_to_pressure: expected a velocity-grid field");
  Field out(GridTag::pressure, u.elem_count, m);
  parallel_for(u.elem_count, [&](std::int64_t e) {
    interp3(u.v.data() + e * n * n * n, out.v.data() + e * m * m * m,
            pbasis.interp_v2p.data(), m, n);
  });
  return out;
}

Field interp_to_pressure_transpose(const Field& p, const PressureBasis& pbasis) {
  const int n = pbasis.nv(), m = pbasis.m();
  if (p.tag != GridTag::pressure || p.n1d != m)
    throw ContractViolation("interp_to_pressure_transpose: expected a pressure-grid field");
  std::vector<double> ivt(static_cast<std::size_t>(n) * m);
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < n; ++j) ivt[j * m + a] = pbasis.interp_v2p[a * n + j];
  Field out(GridTag::velocity, p.elem_count, n);
  parallel_for(p.elem_count, [&](std::int64_t e) {
    interp3(p.v.data() + e * m * m * m, out.v.data() + e * n * n * n, ivt.data(), n, m);
  });
  return out;
}

std::vector<double> element_matrix(int elem, const HelmholtzCoeffs& coeffs,
                                   const GeometricFactors& gf,
                                   const SpectralBasis& basis) {
  const int n = basis.n();
  const int nn = n * n * n;
  // Single-element views of the factors so axhelm can run on a 1-element field.
  GeometricFactors egf;
  egf.elem_count = 1;
  egf.n1d = n;
  egf.has_gradients = false;
  const std::int64_t base = static_cast<std::int64_t>(elem) * nn;
  auto slice = [&](const std::vector<double>& src) {
    return std::vector<double>(src.begin() + base, src.begin() + base + nn);
  };
  egf.g1 = slice(gf.g1);
  egf.g2 = slice(gf.g2);
  egf.g3 = slice(gf.g3);
  egf.g4 = slice(gf.g4);
  egf.g5 = slice(gf.g5);
  egf.g6 = slice(gf.g6);
  egf.bm = slice(gf.bm);
  egf.jac = slice(gf.jac);

  HelmholtzCoeffs local = coeffs;
  Field h1f, h2f;
  if (coeffs.h1_field) {
    h1f = Field(GridTag::velocity, 1, n);
    std::copy_n(coeffs.h1_field->v.begin() + base, nn, h1f.v.begin());
    local.h1_field = &h1f;
  }
  if (coeffs.h2_field) {
    h2f = Field(GridTag::velocity, 1, n);
    std::copy_n(coeffs.h2_field->v.begin() + base, nn, h2f.v.begin());
    local.h2_field = &h2f;
  }

  std::vector<double> mat(static_cast<std::size_t>(nn) * nn, 0.0);
  Field unit(GridTag::velocity, 1, n), col(GridTag::velocity, 1, n);
  for (int c = 0; c < nn; ++c) {
    std::fill(unit.v.begin(), unit.v.end(), 0.0);
    unit.v[c] = 1.0;
    axhelm(unit, local, egf, basis, col);
    for (int r = 0; r < nn; ++r) mat[static_cast<std::size_t>(r) * nn + c] = col.v[r];
  }
  return mat;
}

void HelmholtzOperator::apply(const Field& x, Field& out) const {
  axhelm(x, coeffs, *gf, *basis, out);
  gs_sum_inplace(*map, out);
  if (mask) field_pointwise_mul(*mask, out);
}

Field HelmholtzOperator::assembled_diagonal() const {
  Field diag = axhelm_diagonal(coeffs, *gf, *basis);
  gs_sum_inplace(*map, diag);
  return diag;
}

} // namespace sembox
