#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>

#include "sembox/krylov.hpp"
#include "sembox/schwarz.hpp"

using namespace sembox;

namespace {

struct Setup {
  HexMesh mesh;
  SpectralBasis basis;
  GeometricFactors gf;
  GatherScatterMap map;
  Field mask;

  Setup(int ex, int ey, int ez, int deg, std::array<bool, 3> periodic = {false, false, false})
      : mesh(build_box_mesh(ex, ey, ez, {0, 0, 0}, {1, 1, 1}, periodic)),
        basis(build_gll_basis(deg)),
        gf(build_geometric_factors(mesh, basis)),
        map(build_gather_scatter(mesh, deg)),
        mask(build_dirichlet_mask(mesh, deg)) {}

  Field continuous_masked(std::uint64_t seed) const {
    Field f(GridTag::velocity, mesh.elem_count, basis.n());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (double& v : f.v) v = dist(rng);
    gs_sum_inplace(map, f);
    for (std::int64_t a = 0; a < f.size(); ++a) f.v[a] *= map.inv_mult[a] * mask.v[a];
    return f;
  }
};

// Dense masked true-dof matrix for the oracle comparisons.
Eigen::MatrixXd dense_true_operator(const Setup& s, const HelmholtzCoeffs& hc) {
  const int n = s.basis.n();
  const int nn = n * n * n;
  std::vector<std::int64_t> rep(s.map.global_count);
  for (std::int64_t g = 0; g < s.map.global_count; ++g)
    rep[g] = s.map.group_nodes[s.map.group_offsets[g]];
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s.map.global_count, s.map.global_count);
  for (int e = 0; e < s.mesh.elem_count; ++e) {
    const auto mat = element_matrix(e, hc, s.gf, s.basis);
    const std::int64_t base = static_cast<std::int64_t>(e) * nn;
    for (int r = 0; r < nn; ++r)
      for (int c = 0; c < nn; ++c)
        a(s.map.gid[base + r], s.map.gid[base + c]) +=
            mat[static_cast<std::size_t>(r) * nn + c];
  }
  for (std::int64_t g = 0; g < s.map.global_count; ++g)
    if (s.mask.v[rep[g]] == 0.0) {
      a.row(g).setZero();
      a.col(g).setZero();
      a(g, g) = 1.0;
    }
  return a;
}

} // namespace

TEST_CASE("one whole-domain subdomain without coarse is an exact inverse") {
  const Setup s(2, 2, 2, 2);
  const HelmholtzCoeffs hc{1.0, 0.0, nullptr, nullptr};
  SchwarzOptions opts;
  opts.use_coarse = false;
  const SchwarzPreconditioner pre = build_schwarz(
      s.mesh, s.basis, s.gf, s.map, &s.mask, partition_rcb(s.mesh, 1), hc, opts);
  CHECK(pre.subdomain_count() == 1);

  const Field r = s.continuous_masked(3);
  const Field z = apply_schwarz(pre, r);

  const Eigen::MatrixXd a = dense_true_operator(s, hc);
  Eigen::VectorXd rt(s.map.global_count);
  for (std::int64_t g = 0; g < s.map.global_count; ++g)
    rt(g) = r.v[s.map.group_nodes[s.map.group_offsets[g]]];
  const Eigen::VectorXd zt = a.ldlt().solve(rt);
  for (std::int64_t g = 0; g < s.map.global_count; ++g) {
    const auto rep = s.map.group_nodes[s.map.group_offsets[g]];
    if (s.mask.v[rep] == 0.0) continue;
    CHECK(z.v[rep] == doctest::Approx(zt(g)).epsilon(1e-10));
  }

  // preconditioned CG with the exact inverse converges in a couple of steps
  HelmholtzOperator op{&s.gf, &s.basis, &s.map, &s.mask, hc};
  const DotFn dot = [&](const Field& x, const Field& y) {
    return field_dot_weighted(x, y, s.map.inv_mult);
  };
  Field x(GridTag::velocity, s.mesh.elem_count, s.basis.n());
  KrylovConfig cfg;
  cfg.tolerance = 1e-10;
  const PcgResult res =
      pcg([&](const Field& in, Field& out) { op.apply(in, out); }, r,
          [&](const Field& in, Field& out) { out = apply_schwarz(pre, in); }, dot, cfg, x);
  CHECK(res.converged);
  CHECK(res.iterations <= 2);
}

TEST_CASE("overlap weights form a partition of unity") {
  const Setup s(2, 2, 2, 2);
  const SchwarzPreconditioner pre =
      build_schwarz(s.mesh, s.basis, s.gf, s.map, &s.mask, partition_rcb(s.mesh, 2),
                    {1.0, 0.0, nullptr, nullptr}, {});
  const std::vector<double> sums = pre.overlap_weight_sums();
  REQUIRE(static_cast<std::int64_t>(sums.size()) == s.map.global_count);
  for (std::int64_t g = 0; g < s.map.global_count; ++g) {
    const auto rep = s.map.group_nodes[s.map.group_offsets[g]];
    if (s.mask.v[rep] == 0.0)
      CHECK(sums[g] == 0.0); // constrained dofs are not unknowns
    else
      CHECK(sums[g] == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("apply_schwarz is linear symmetric and zero-preserving") {
  const Setup s(3, 2, 2, 3);
  const SchwarzPreconditioner pre =
      build_schwarz(s.mesh, s.basis, s.gf, s.map, &s.mask, partition_rcb(s.mesh, 4),
                    {1.0, 0.0, nullptr, nullptr}, {});
  Field zero(GridTag::velocity, s.mesh.elem_count, s.basis.n());
  CHECK(field_max_abs(apply_schwarz(pre, zero)) == 0.0);

  const Field r = s.continuous_masked(10), t = s.continuous_masked(11);
  const Field zr = apply_schwarz(pre, r), zt2 = apply_schwarz(pre, t);
  const double lhs = field_dot_weighted(zr, t, s.map.inv_mult);
  const double rhs = field_dot_weighted(r, zt2, s.map.inv_mult);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));

  SchwarzPreconditioner unbuilt;
  CHECK_THROWS_AS(apply_schwarz(unbuilt, r), ContractViolation);
}

TEST_CASE("pressure wrap is symmetric in the plain inner product") {
  const Setup s(2, 2, 2, 4);
  const PressureBasis pb = build_pressure_basis(4);
  const SchwarzPreconditioner pre =
      build_schwarz(s.mesh, s.basis, s.gf, s.map, &s.mask, partition_rcb(s.mesh, 8),
                    {1.0, 0.0, nullptr, nullptr}, {});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  Field r(GridTag::pressure, s.mesh.elem_count, pb.m()), t = r;
  for (double& v : r.v) v = dist(rng);
  for (double& v : t.v) v = dist(rng);
  const Field zr = apply_schwarz_pressure(pre, r, pb);
  const Field zt2 = apply_schwarz_pressure(pre, t, pb);
  CHECK(field_dot(zr, t) == doctest::Approx(field_dot(r, zt2)).epsilon(1e-11));
}

TEST_CASE("schwarz beats jacobi on a small stiffness solve") {
  const Setup s(3, 3, 3, 4);
  const HelmholtzCoeffs hc{1.0, 0.0, nullptr, nullptr};
  HelmholtzOperator op{&s.gf, &s.basis, &s.map, &s.mask, hc};
  const Field diag = op.assembled_diagonal();
  const SchwarzPreconditioner pre =
      build_schwarz(s.mesh, s.basis, s.gf, s.map, &s.mask,
                    partition_rcb(s.mesh, s.mesh.elem_count), hc, {});

  const Field b = s.continuous_masked(77);
  const DotFn dot = [&](const Field& x, const Field& y) {
    return field_dot_weighted(x, y, s.map.inv_mult);
  };
  KrylovConfig cfg;
  cfg.tolerance = 1e-8;
  cfg.max_iterations = 2000;

  Field x1(GridTag::velocity, s.mesh.elem_count, s.basis.n());
  const PcgResult jac =
      pcg([&](const Field& in, Field& out) { op.apply(in, out); }, b,
          [&](const Field& in, Field& out) {
            out = in;
            for (std::int64_t a = 0; a < in.size(); ++a)
              out.v[a] = in.v[a] / diag.v[a];
          },
          dot, cfg, x1);
  Field x2(GridTag::velocity, s.mesh.elem_count, s.basis.n());
  const PcgResult schwarz =
      pcg([&](const Field& in, Field& out) { op.apply(in, out); }, b,
          [&](const Field& in, Field& out) { out = apply_schwarz(pre, in); }, dot, cfg, x2);
  CHECK(jac.converged);
  CHECK(schwarz.converged);
  CHECK(schwarz.iterations < jac.iterations);

  // the preconditioner does not move the fixed point
  for (std::int64_t a = 0; a < x1.size(); ++a)
    CHECK(x1.v[a] == doctest::Approx(x2.v[a]).epsilon(10 * cfg.tolerance));
}

TEST_CASE("vertex coarse space solves its own operator") {
  const Setup s(3, 2, 2, 3);
  const VertexCoarseSpace cs = build_vertex_coarse_space(
      s.mesh, s.basis, s.gf, s.map, &s.mask, {1.0, 0.0, nullptr, nullptr}, false);
  CHECK(cs.a0.n > 0);
  const XXTFactor f = xxt_factor(cs.a0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> b(cs.a0.n);
  for (double& v : b) v = dist(rng);
  const std::vector<double> x = xxt_solve(f, b);
  std::vector<double> ax;
  cs.a0.multiply(x, ax);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < cs.a0.n; ++i) {
    num += (ax[i] - b[i]) * (ax[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}
