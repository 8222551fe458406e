#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "sembox/app.hpp"
#include "sembox/oracle.hpp"
#include "sembox/xxt.hpp"

namespace sembox {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why << what;
    }
  }
};

using Clock = std::chrono::steady_clock;

SuiteResult run_suite(const std::string& name, const std::function<void(Check&)>& body) {
  SuiteResult res;
  res.name = name;
  const auto t0 = Clock::now();
  Check c;
  try {
    body(c);
    res.passed = c.ok;
    res.detail = c.why.str();
  } catch (const std::exception& e) {
    res.passed = false;
    res.detail = e.what();
  }
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

double analytic_monomial_integral(int p) { // over [-1,1]
  return p % 2 == 1 ? 0.0 : 2.0 / (p + 1);
}

void suite_basis(Check& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int deg : {2, 5, 9, 12}) {
    const SpectralBasis b = build_gll_basis(deg);
    double wsum = 0.0;
    for (double w : b.weights) wsum += w;
    c.expect(std::abs(wsum - 2.0) < 1e-13, "weight sum off at N=" + std::to_string(deg));

    // quadrature exactness up to 2N-1 on random polynomials
    std::vector<double> poly(2 * deg); // coefficients of degree 2N-1
    for (double& v : poly) v = coef(rng);
    double quad = 0.0, exact = 0.0;
    for (int i = 0; i <= deg; ++i) {
      double x = 1.0, val = 0.0;
      for (double a : poly) {
        val += a * x;
        x *= b.nodes[i];
      }
      quad += b.weights[i] * val;
    }
    for (std::size_t p = 0; p < poly.size(); ++p)
      exact += poly[p] * analytic_monomial_integral(static_cast<int>(p));
    c.expect(std::abs(quad - exact) < 1e-12 * (1.0 + std::abs(exact)),
             "quadrature inexact at N=" + std::to_string(deg));

    // derivative matrix rows sum to zero
    for (int i = 0; i <= deg; ++i) {
      double rs = 0.0;
      for (int j = 0; j <= deg; ++j) rs += b.d(i, j);
      c.expect(std::abs(rs) < 1e-12, "D row sum off at N=" + std::to_string(deg));
    }
  }
  // derivative of x^3 sampled at N=4
  const SpectralBasis b4 = build_gll_basis(4);
  for (int i = 0; i < 5; ++i) {
    double d = 0.0;
    for (int j = 0; j < 5; ++j) d += b4.d(i, j) * b4.nodes[j] * b4.nodes[j] * b4.nodes[j];
    c.expect(std::abs(d - 3.0 * b4.nodes[i] * b4.nodes[i]) < 1e-12, "cubic derivative off");
  }
  // pressure interpolation reproduces a degree-N polynomial at GL points
  const int nv = 7;
  const SpectralBasis bv = build_gll_basis(nv);
  const PressureBasis pb = build_pressure_basis(nv);
  std::vector<double> samples(bv.n());
  for (int i = 0; i < bv.n(); ++i) {
    double x = bv.nodes[i], v = 0.0, xx = 1.0;
    for (int p = 0; p <= nv; ++p) {
      v += (p + 1) * 0.25 * xx;
      xx *= x;
    }
    samples[i] = v;
  }
  for (int a = 0; a < pb.m(); ++a) {
    double interp = 0.0;
    for (int j = 0; j < bv.n(); ++j) interp += pb.iv2p(a, j) * samples[j];
    double x = pb.nodes[a], v = 0.0, xx = 1.0;
    for (int p = 0; p <= nv; ++p) {
      v += (p + 1) * 0.25 * xx;
      xx *= x;
    }
    c.expect(std::abs(interp - v) < 1e-12, "pressure interpolation inexact");
  }
}

void suite_operator_oracles(Check& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int deg : {1, 2, 3}) {
    const HexMesh mesh =
        build_box_mesh(2, 1, 1, {0, 0, 0}, {1.7, 0.9, 1.2}, {false, false, false});
    const SpectralBasis basis = build_gll_basis(deg);
    const GeometricFactors gf = build_geometric_factors(mesh, basis);
    const int nn = basis.n() * basis.n() * basis.n();

    HelmholtzCoeffs hc;
    hc.h1 = 0.8;
    hc.h2 = 0.3;
    Field u(GridTag::velocity, mesh.elem_count, basis.n());
    for (double& v : u.v) v = dist(rng);
    const Field w = axhelm(u, hc, gf, basis);

    for (int e = 0; e < mesh.elem_count; ++e) {
      const std::vector<double> dense =
          oracle::dense_helmholtz_element(mesh, e, basis, hc.h1, hc.h2);
      for (int r = 0; r < nn; ++r) {
        double s = 0.0;
        for (int col = 0; col < nn; ++col)
          s += dense[static_cast<std::size_t>(r) * nn + col] * u.v[e * nn + col];
        c.expect(std::abs(s - w.v[e * nn + r]) < 1e-11,
                 "axhelm disagrees with the dense assembly at N=" + std::to_string(deg));
      }
    }

    // constants in the stiffness null space; mass-only path exact
    Field ones(GridTag::velocity, mesh.elem_count, basis.n());
    field_fill(ones, 1.0);
    HelmholtzCoeffs stiff;
    stiff.h1 = 1.0;
    stiff.h2 = 0.0;
    c.expect(field_max_abs(axhelm(ones, stiff, gf, basis)) < 1e-12,
             "stiffness of a constant is not zero");
    HelmholtzCoeffs mass;
    mass.h1 = 0.0;
    mass.h2 = 1.0;
    const Field bm_only = axhelm(u, mass, gf, basis);
    for (std::int64_t a = 0; a < u.size(); ++a)
      c.expect(bm_only.v[a] == gf.bm[a] * u.v[a], "mass-only path not exact");
  }
}

void suite_adjoint(Check& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int deg = 5;
  const HexMesh mesh = build_box_mesh(2, 2, 1, {0, 0, 0}, {1, 1.3, 0.8}, {false, false, false});
  const SpectralBasis basis = build_gll_basis(deg);
  const PressureBasis pbasis = build_pressure_basis(deg);
  const PressureGeometry pg = build_pressure_geometry(mesh, pbasis);

  VectorField u{Field(GridTag::velocity, mesh.elem_count, basis.n()),
                Field(GridTag::velocity, mesh.elem_count, basis.n()),
                Field(GridTag::velocity, mesh.elem_count, basis.n())};
  for (auto& f : u)
    for (double& v : f.v) v = dist(rng);
  Field p(GridTag::pressure, mesh.elem_count, pbasis.m());
  for (double& v : p.v) v = dist(rng);

  const Field div = divergence_to_pressure(u[0], u[1], u[2], pg, basis, pbasis);
  const VectorField grad = gradient_from_pressure(p, pg, basis, pbasis);
  const double lhs = field_dot(div, p);
  double rhs = 0.0;
  for (int d = 0; d < 3; ++d) rhs += field_dot(u[d], grad[d]);
  c.expect(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)),
           "divergence/gradient adjoint identity failed");

  VectorField unit{u[0], u[1], u[2]};
  field_fill(unit[0], 1.0);
  field_fill(unit[1], 0.0);
  field_fill(unit[2], 0.0);
  c.expect(field_max_abs(divergence_to_pressure(unit[0], unit[1], unit[2], pg, basis,
                                                pbasis)) < 1e-12,
           "divergence of a uniform field is not zero");
}

void suite_xxt(Check& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int n : {5, 30, 100}) {
    std::vector<std::pair<std::pair<int, int>, double>> trip;
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (double& v : m) v = dist(rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += m[static_cast<std::size_t>(i) * n + k] * m[static_cast<std::size_t>(j) * n + k];
        if (i == j) s += 0.5 * n;
        trip.push_back({{i, j}, s});
      }
    const SparseSpd a = SparseSpd::from_triplets(n, std::move(trip));
    const XXTFactor f = xxt_factor(a);
    std::vector<double> b(n), ax;
    for (double& v : b) v = dist(rng);
    const std::vector<double> x = xxt_solve(f, b);
    a.multiply(x, ax);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += (ax[i] - b[i]) * (ax[i] - b[i]);
      den += b[i] * b[i];
    }
    c.expect(std::sqrt(num / den) <= 1e-9, "xxt residual too large at n=" + std::to_string(n));
  }
}

void suite_divergence_bound(Check& c) {
  const HexMesh mesh =
      build_box_mesh(2, 2, 2, {0, -1, 0}, {2, 2, 2}, {true, false, true});
  SolverSettings settings;
  settings.velocity_tolerance = 1e-10;
  settings.pressure_tolerance = 1e-8;
  settings.projection_depth = 4;
  FlowSolver solver(mesh, 4, 2, 0.05, 1.0, constant_forcing({2.0, 0.0, 0.0}), settings);
  FlowState state = solver.initial_state();
  for (int s = 0; s < 10; ++s) {
    const StepTelemetry t = solver.advance(state);
    c.expect(t.divergence <= 10.0 * settings.pressure_tolerance,
             "divergence after correction exceeded 10x the pressure tolerance at step " +
                 std::to_string(t.step));
  }
}

void suite_temporal_order(Check& c) {
  const double len = 2.0 * M_PI;
  const HexMesh mesh =
      build_box_mesh(2, 2, 2, {0, 0, 0}, {len, len, len}, {true, true, true});
  const double re = 100.0, amp = 0.3, t_final = 0.4;

  auto exact = [&](double x, double y, double z, double t) {
    return std::array<double, 3>{amp * std::cos(t) * std::sin(y),
                                 amp * std::cos(t) * std::sin(z),
                                 amp * std::cos(t) * std::sin(x)};
  };
  ForcingFn forcing = [=](double x, double y, double z, double t) {
    const double ct = std::cos(t), st = std::sin(t);
    return std::array<double, 3>{
        -amp * st * std::sin(y) + amp * amp * ct * ct * std::sin(z) * std::cos(y) +
            amp / re * ct * std::sin(y),
        -amp * st * std::sin(z) + amp * amp * ct * ct * std::sin(x) * std::cos(z) +
            amp / re * ct * std::sin(z),
        -amp * st * std::sin(x) + amp * amp * ct * ct * std::sin(y) * std::cos(x) +
            amp / re * ct * std::sin(x)};
  };

  SolverSettings settings;
  settings.velocity_tolerance = 1e-11;
  settings.pressure_tolerance = 1e-10;
  settings.projection_depth = 0;
  const int order = 7, k = 2;

  auto run = [&](int steps) {
    FlowSolver solver(mesh, order, k, t_final / steps, re, forcing, settings);
    std::vector<VectorField> hist;
    for (int j = 0; j < k; ++j) {
      const double t = -j * (t_final / steps);
      VectorField u{solver.make_velocity_field(), solver.make_velocity_field(),
                    solver.make_velocity_field()};
      const int n = solver.basis().n();
      for (int e = 0; e < mesh.elem_count; ++e)
        for (int kk = 0; kk < n; ++kk)
          for (int jj = 0; jj < n; ++jj)
            for (int ii = 0; ii < n; ++ii) {
              const auto x = oracle::trilinear_point(mesh, e, solver.basis().nodes[ii],
                                                     solver.basis().nodes[jj],
                                                     solver.basis().nodes[kk]);
              const auto v = exact(x[0], x[1], x[2], t);
              for (int d = 0; d < 3; ++d) u[d].at(e, ii, jj, kk) = v[d];
            }
      hist.push_back(u);
    }
    FlowState state =
        solver.state_from_history(hist, solver.make_pressure_field(), 0.0, k + 1);
    for (int s = 0; s < steps; ++s) solver.advance(state);
    return state.u_hist.front();
  };

  const VectorField u1 = run(10), u2 = run(20), u3 = run(40);
  double d1 = 0.0, d2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    Field a = u1[d];
    field_axpy(-1.0, u2[d], a);
    Field b = u2[d];
    field_axpy(-1.0, u3[d], b);
    d1 += field_dot(a, a);
    d2 += field_dot(b, b);
  }
  const double observed = std::log2(std::sqrt(d1) / std::sqrt(d2));
  std::ostringstream os;
  os << "observed order " << observed;
  c.expect(observed > 1.5 && observed < 2.5, os.str());
}

} // namespace

std::vector<SuiteResult> run_validate(const ValidateOptions& options) {
  debug::axhelm_sign_flip.store(options.mutate_axhelm);
  std::mt19937_64 rng(options.seed);
  std::vector<SuiteResult> out;
  out.push_back(run_suite("basis-exactness", [&](Check& c) { suite_basis(c, rng); }));
  out.push_back(
      run_suite("operator-oracles", [&](Check& c) { suite_operator_oracles(c, rng); }));
  out.push_back(run_suite("divergence-gradient-adjoint",
                          [&](Check& c) { suite_adjoint(c, rng); }));
  out.push_back(run_suite("xxt-exactness", [&](Check& c) { suite_xxt(c, rng); }));
  out.push_back(run_suite("divergence-bound", [&](Check& c) { suite_divergence_bound(c); }));
  out.push_back(run_suite("temporal-order", [&](Check& c) { suite_temporal_order(c); }));
  debug::axhelm_sign_flip.store(false);
  return out;
}

} // namespace sembox
