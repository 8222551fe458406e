#include "sembox/stepper.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "sembox/parallel.hpp"

namespace sembox {

std::pair<std::vector<double>, std::vector<double>> bdf_ext_coefficients(int order) {
  switch (order) {
    case 1:
      return {{1.0, -1.0}, {1.0}};
    case 2:
      return {{1.5, -2.0, 0.5}, {2.0, -1.0}};
    case 3:
      return {{11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0}, {3.0, -3.0, 1.0}};
    default:
      throw ConfigError("bdf_ext_coefficients: unsupported order " +
                        std::to_string(order));
  }
}

TimeScheme make_time_scheme(int order, double dt) {
  TimeScheme s;
  s.order = order;
  s.dt = dt;
  auto [b, a] = bdf_ext_coefficients(order);
  s.bdf = std::move(b);
  s.ext = std::move(a);
  return s;
}

ForcingFn constant_forcing(const std::array<double, 3>& f) {
  return [f](double, double, double, double) { return f; };
}

namespace {

// Physical coordinates of the velocity node (i,j,k) of element e.
std::array<double, 3> node_coords(const HexMesh& mesh, const SpectralBasis& basis, int e,
                                  int i, int j, int k) {
  const double r = basis.nodes[i], s = basis.nodes[j], t = basis.nodes[k];
  const double phi[3][2] = {{0.5 * (1 - r), 0.5 * (1 + r)},
                            {0.5 * (1 - s), 0.5 * (1 + s)},
                            {0.5 * (1 - t), 0.5 * (1 + t)}};
  std::array<double, 3> x{0, 0, 0};
  for (int c = 0; c < 8; ++c) {
    const double w = phi[0][c & 1] * phi[1][(c >> 1) & 1] * phi[2][(c >> 2) & 1];
    for (int d = 0; d < 3; ++d) x[d] += w * mesh.corners[e][c][d];
  }
  return x;
}

} // namespace

FlowSolver::FlowSolver(const HexMesh& mesh, int order, int scheme_order, double dt,
                       double reynolds, ForcingFn forcing, SolverSettings settings)
    : mesh_(mesh),
      basis_(build_gll_basis(order)),
      pbasis_(build_pressure_basis(order)),
      gf_(build_geometric_factors(mesh, basis_)),
      pg_(build_pressure_geometry(mesh, pbasis_)),
      map_(build_gather_scatter(mesh, order)),
      mask_(build_dirichlet_mask(mesh, order)),
      settings_(settings),
      scheme_order_(scheme_order),
      dt_(dt),
      reynolds_(reynolds),
      forcing_(std::move(forcing)),
      projection_(settings.projection_depth) {
  if (scheme_order_ < 1 || scheme_order_ > 3)
    throw ConfigError("FlowSolver: time scheme order must be 1, 2 or 3");
  if (!(dt_ > 0.0)) throw ConfigError("FlowSolver: dt must be positive");
  if (!(reynolds_ > 0.0)) throw ConfigError("FlowSolver: Reynolds number must be positive");

  bdiag_ = Field(GridTag::velocity, mesh_.elem_count, basis_.n());
  std::copy(gf_.bm.begin(), gf_.bm.end(), bdiag_.v.begin());
  gs_sum_inplace(map_, bdiag_);
  inv_bdiag_ = Field(GridTag::velocity, mesh_.elem_count, basis_.n());
  for (std::int64_t a = 0; a < bdiag_.size(); ++a)
    inv_bdiag_.v[a] = mask_.v[a] / bdiag_.v[a];

  for (int k = 1; k <= 3; ++k) {
    schemes_.push_back(make_time_scheme(k, dt_));
    HelmholtzCoeffs hc;
    hc.h1 = 1.0 / reynolds_;
    hc.h2 = schemes_.back().bdf[0] / dt_;
    HelmholtzOperator op{&gf_, &basis_, &map_, &mask_, hc};
    velocity_diag_.push_back(op.assembled_diagonal());
  }

  const bool fully_periodic = mesh_.periodic[0] && mesh_.periodic[1] && mesh_.periodic[2];
  if (settings_.pressure_preconditioner == PrecondKind::schwarz) {
    const int ranks = settings_.schwarz_ranks > 0
                          ? std::min(settings_.schwarz_ranks, mesh_.elem_count)
                          : mesh_.elem_count;
    const Partition part = partition_rcb(mesh_, ranks);
    HelmholtzCoeffs stiffness;
    stiffness.h1 = 1.0;
    stiffness.h2 = 0.0;
    SchwarzOptions opts;
    opts.use_coarse = settings_.coarse_solve;
    opts.has_nullspace = fully_periodic;
    pressure_schwarz_ =
        build_schwarz(mesh_, basis_, gf_, map_, &mask_, part, stiffness, opts);
  }
  if (settings_.pressure_preconditioner == PrecondKind::jacobi)
    pressure_diag_ = pressure_operator_diagonal();

  if (mesh_.structured())
    for (int d = 0; d < 3; ++d)
      elem_size_[d] = mesh_.lengths[d] / std::array<int, 3>{mesh_.ex, mesh_.ey, mesh_.ez}[d];
}

FlowState FlowSolver::initial_state() const {
  FlowState st;
  VectorField zero{make_velocity_field(), make_velocity_field(), make_velocity_field()};
  st.u_hist.push_back(zero);
  st.n_hist.push_back(zero);
  st.p = make_pressure_field();
  return st;
}

FlowState FlowSolver::state_from_history(const std::vector<VectorField>& u_newest_first,
                                         const Field& p, double time,
                                         int step_index) const {
  if (u_newest_first.empty())
    throw ContractViolation("state_from_history: need at least one velocity");
  FlowState st;
  st.time = time;
  st.step_index = step_index;
  st.p = p;
  for (const auto& u : u_newest_first) {
    st.u_hist.push_back(u);
    st.n_hist.push_back(advect(u, u, gf_, basis_));
  }
  return st;
}

Field FlowSolver::forcing_field_component(double t, int comp) const {
  Field f = Field(GridTag::velocity, mesh_.elem_count, basis_.n());
  const int n = basis_.n();
  parallel_for(mesh_.elem_count, [&](std::int64_t e) {
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const auto x = node_coords(mesh_, basis_, static_cast<int>(e), i, j, k);
          f.at(static_cast<int>(e), i, j, k) = forcing_(x[0], x[1], x[2], t)[comp];
        }
  });
  return f;
}

VectorField FlowSolver::assemble_forcing_terms(const FlowState& state,
                                               const TimeScheme& scheme,
                                               double t_new) const {
  if (static_cast<int>(state.n_hist.size()) < scheme.order)
    throw ContractViolation("assemble_forcing_terms: history shorter than scheme order");
  VectorField fn{make_velocity_field(), make_velocity_field(), make_velocity_field()};
  for (int d = 0; d < 3; ++d) {
    Field fd = forcing_field_component(t_new, d);
    parallel_for_ranges(fd.size(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t a = lo; a < hi; ++a) fn[d].v[a] = gf_.bm[a] * fd.v[a];
    });
    // advection enters with the physical sign: du/dt = -(u.grad)u + ...
    for (int j = 1; j <= scheme.order; ++j)
      field_axpy(-scheme.ext[j - 1], state.n_hist[j - 1][d], fn[d]);
  }
  return fn;
}

PrecondFn FlowSolver::velocity_precond(int ramp_order) const {
  if (settings_.velocity_preconditioner == PrecondKind::none) return nullptr;
  // Jacobi on the assembled Helmholtz diagonal (schwarz for velocity falls
  // back to jacobi as well: the velocity solve is mass-dominated).
  const Field* diag = &velocity_diag_[ramp_order - 1];
  return [diag](const Field& r, Field& z) {
    if (!z.same_shape(r)) z = Field(r.tag, r.elem_count, r.n1d);
    parallel_for_ranges(r.size(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t a = lo; a < hi; ++a) z.v[a] = r.v[a] / diag->v[a];
    });
  };
}

VectorField FlowSolver::solve_velocity_star(const FlowState& state,
                                            const TimeScheme& scheme,
                                            const VectorField& fn,
                                            StepTelemetry& tel) const {
  if (static_cast<int>(state.u_hist.size()) < scheme.order)
    throw ContractViolation("solve_velocity_star: history shorter than scheme order");
  HelmholtzCoeffs hc;
  hc.h1 = 1.0 / reynolds_;
  hc.h2 = scheme.bdf[0] / dt_;
  HelmholtzOperator op{&gf_, &basis_, &map_, &mask_, hc};
  const DotFn dot = [this](const Field& a, const Field& b) {
    return field_dot_weighted(a, b, map_.inv_mult);
  };
  KrylovConfig cfg;
  cfg.tolerance = settings_.velocity_tolerance;
  cfg.max_iterations = settings_.max_iterations;
  const PrecondFn pre = velocity_precond(scheme.order);
  const VectorField gp = gradient_from_pressure(state.p, pg_, basis_, pbasis_);

  VectorField ustar{make_velocity_field(), make_velocity_field(), make_velocity_field()};
  const char* names[3] = {"x", "y", "z"};
  for (int d = 0; d < 3; ++d) {
    Field rhs = fn[d];
    field_axpy(1.0, gp[d], rhs);
    for (int j = 1; j <= scheme.order; ++j) {
      const double c = -scheme.bdf[j] / dt_;
      parallel_for_ranges(rhs.size(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t a = lo; a < hi; ++a)
          rhs.v[a] += c * gf_.bm[a] * state.u_hist[j - 1][d].v[a];
      });
    }
    gs_sum_inplace(map_, rhs);
    field_pointwise_mul(mask_, rhs);

    ustar[d] = state.u_hist[0][d]; // previous solution as the initial guess
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PcgResult r = pcg([&op](const Field& x, Field& y) { op.apply(x, y); }, rhs,
                              pre, dot, cfg, ustar[d]);
      tel.iterations_v[d] = r.iterations;
      tel.residuals_v[d] = r.rel_residual;
      tel.residual_v = std::max(tel.residual_v, r.rel_residual);
    } catch (const SolverError& e) {
      throw SolverError(std::string("velocity component ") + names[d] + ": " + e.what(),
                        e.iteration);
    }
    tel.seconds_v[d] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return ustar;
}

void FlowSolver::apply_pressure_operator(const Field& p, Field& out) const {
  VectorField g = gradient_from_pressure(p, pg_, basis_, pbasis_);
  for (int d = 0; d < 3; ++d) {
    gs_sum_inplace(map_, g[d]);
    field_pointwise_mul(inv_bdiag_, g[d]); // carries the Dirichlet mask
  }
  out = divergence_to_pressure(g[0], g[1], g[2], pg_, basis_, pbasis_);
}

Field FlowSolver::pressure_operator_diagonal() const {
  const int m = pbasis_.m(), n = basis_.n();
  const int mm = m * m * m, nn = n * n * n;
  Field diag(GridTag::pressure, mesh_.elem_count, m);
  parallel_for(mesh_.elem_count, [&](std::int64_t e) {
    // single-element slices of the pressure geometry
    PressureGeometry pge;
    pge.elem_count = 1;
    pge.m1d = m;
    pge.wdetj.assign(pg_.wdetj.begin() + e * mm, pg_.wdetj.begin() + (e + 1) * mm);
    pge.drdx.assign(pg_.drdx.begin() + e * mm * 9, pg_.drdx.begin() + (e + 1) * mm * 9);
    Field unit(GridTag::pressure, 1, m);
    for (int q = 0; q < mm; ++q) {
      std::fill(unit.v.begin(), unit.v.end(), 0.0);
      unit.v[q] = 1.0;
      const VectorField g = gradient_from_pressure(unit, pge, basis_, pbasis_);
      double s = 0.0;
      for (int d = 0; d < 3; ++d)
        for (int a = 0; a < nn; ++a) {
          const double v = g[d].v[a];
          s += v * v * inv_bdiag_.v[e * nn + a];
        }
      diag.v[e * mm + q] = s;
    }
  });
  return diag;
}

PrecondFn FlowSolver::pressure_precond() const {
  const auto deflate = [](Field& z) {
    double mean = 0.0;
    for (double v : z.v) mean += v;
    mean /= static_cast<double>(z.size());
    for (double& v : z.v) v -= mean;
  };
  switch (settings_.pressure_preconditioner) {
    case PrecondKind::none:
      return [deflate](const Field& r, Field& z) {
        field_copy(r, z);
        deflate(z);
      };
    case PrecondKind::jacobi: {
      const Field* diag = &pressure_diag_;
      return [diag, deflate](const Field& r, Field& z) {
        if (!z.same_shape(r)) z = Field(r.tag, r.elem_count, r.n1d);
        for (std::int64_t a = 0; a < r.size(); ++a) z.v[a] = r.v[a] / diag->v[a];
        deflate(z);
      };
    }
    case PrecondKind::schwarz: {
      const SchwarzPreconditioner* pre = &pressure_schwarz_;
      const PressureBasis* pb = &pbasis_;
      return [pre, pb, deflate](const Field& r, Field& z) {
        z = apply_schwarz_pressure(*pre, r, *pb);
        deflate(z);
      };
    }
  }
  return nullptr;
}

Field FlowSolver::solve_pressure_update(const VectorField& u_star,
                                        const TimeScheme& scheme, StepTelemetry& tel) {
  Field rhs = divergence_to_pressure(u_star[0], u_star[1], u_star[2], pg_, basis_, pbasis_);
  field_scale(rhs, -scheme.bdf[0] / dt_);

  // Deflate the constant mode (pure Neumann null space).
  double mean = 0.0;
  for (double v : rhs.v) mean += v;
  mean /= static_cast<double>(rhs.size());
  for (double& v : rhs.v) v -= mean;
  double mean_after = 0.0;
  for (double v : rhs.v) mean_after += v;
  mean_after /= static_cast<double>(rhs.size());
  if (std::abs(mean_after) > 1e-10 * std::max(1.0, field_norm2(rhs)))
    throw ContractViolation("solve_pressure_update: rhs mean " +
                            std::to_string(mean_after) + " after deflation");

  const ApplyFn apply_e = [this](const Field& x, Field& y) {
    apply_pressure_operator(x, y);
  };
  KrylovConfig cfg;
  cfg.tolerance = settings_.pressure_tolerance;
  cfg.max_iterations = settings_.max_iterations;

  Field dp = projection_.project_guess(rhs, field_dot);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const PcgResult r =
        pcg(apply_e, rhs, pressure_precond(), field_dot, cfg, dp);
    tel.iterations_p = r.iterations;
    tel.residual_p = r.rel_residual;
  } catch (const SolverError& e) {
    throw SolverError(std::string("pressure update: ") + e.what(), e.iteration);
  }
  tel.seconds_p =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (settings_.projection_depth > 0) projection_.append(dp, apply_e, field_dot);
  return dp;
}

void FlowSolver::correct_fields(FlowState& state, VectorField u_star, const Field& dp,
                                const TimeScheme& scheme, StepTelemetry& tel) const {
  VectorField g = gradient_from_pressure(dp, pg_, basis_, pbasis_);
  const double c = dt_ / scheme.bdf[0];
  for (int d = 0; d < 3; ++d) {
    gs_sum_inplace(map_, g[d]);
    parallel_for_ranges(g[d].size(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t a = lo; a < hi; ++a)
        u_star[d].v[a] += c * g[d].v[a] * inv_bdiag_.v[a];
    });
  }
  field_axpy(1.0, dp, state.p);
  tel.divergence = divergence_norm(u_star);

  state.u_hist.push_front(std::move(u_star));
  while (static_cast<int>(state.u_hist.size()) > scheme_order_) state.u_hist.pop_back();
}

StepTelemetry FlowSolver::advance(FlowState& state) {
  const auto t0 = std::chrono::steady_clock::now();
  StepTelemetry tel;
  const int ramp = std::min(scheme_order_, state.step_index + 1);
  const TimeScheme& scheme = schemes_[ramp - 1];
  const double t_new = state.time + dt_;

  // Advection of the newest velocity; histories stay order-deep.
  state.n_hist.push_front(advect(state.u_hist[0], state.u_hist[0], gf_, basis_));
  while (static_cast<int>(state.n_hist.size()) > scheme_order_) state.n_hist.pop_back();

  const VectorField fn = assemble_forcing_terms(state, scheme, t_new);
  VectorField u_star = solve_velocity_star(state, scheme, fn, tel);
  const Field dp = solve_pressure_update(u_star, scheme, tel);
  correct_fields(state, std::move(u_star), dp, scheme, tel);

  state.time = t_new;
  ++state.step_index;
  tel.step = state.step_index;
  tel.time = state.time;

  if (mesh_.structured()) {
    double cfl = 0.0;
    const double nsq = static_cast<double>(basis_.order) * basis_.order;
    for (int d = 0; d < 3; ++d)
      cfl = std::max(cfl,
                     field_max_abs(state.u_hist[0][d]) * nsq / elem_size_[d] * dt_);
    tel.cfl = cfl;
  }
  tel.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return tel;
}

double FlowSolver::divergence_norm(const VectorField& u) const {
  const Field div = divergence_to_pressure(u[0], u[1], u[2], pg_, basis_, pbasis_);
  return field_norm2(div);
}

double FlowSolver::kinetic_energy(const VectorField& u) const {
  double ke = 0.0;
  for (int d = 0; d < 3; ++d) {
    Field bu = u[d];
    parallel_for_ranges(bu.size(), [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t a = lo; a < hi; ++a) bu.v[a] *= gf_.bm[a];
    });
    ke += 0.5 * field_dot_weighted(u[d], bu, map_.inv_mult);
  }
  return ke;
}

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x53454D424F583031ULL; // "SEMBOX01"

void write_raw(std::ofstream& out, const void* p, std::size_t bytes) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}
void read_raw(std::ifstream& in, void* p, std::size_t bytes) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (!in) throw ConfigError("read_checkpoint: truncated file");
}

} // namespace

void write_checkpoint(const std::string& path, const FlowSolver& solver,
                      const FlowState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_checkpoint: cannot open " + path);
  const std::int64_t header[5] = {static_cast<std::int64_t>(kCheckpointMagic),
                                  solver.mesh().elem_count, solver.basis().order,
                                  solver.scheme_order(), state.step_index};
  write_raw(out, header, sizeof(header));
  const double dheader[3] = {solver.dt(), state.time, solver.reynolds()};
  write_raw(out, dheader, sizeof(dheader));
  const std::int64_t depth = static_cast<std::int64_t>(state.u_hist.size());
  write_raw(out, &depth, sizeof(depth));
  for (const auto& u : state.u_hist)
    for (int d = 0; d < 3; ++d)
      write_raw(out, u[d].v.data(), u[d].v.size() * sizeof(double));
  write_raw(out, state.p.v.data(), state.p.v.size() * sizeof(double));
  const std::int64_t ndepth = static_cast<std::int64_t>(state.n_hist.size());
  write_raw(out, &ndepth, sizeof(ndepth));
  for (const auto& nh : state.n_hist)
    for (int d = 0; d < 3; ++d)
      write_raw(out, nh[d].v.data(), nh[d].v.size() * sizeof(double));
}

FlowState read_checkpoint(const std::string& path, const FlowSolver& solver) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_checkpoint: cannot open " + path);
  std::int64_t header[5];
  read_raw(in, header, sizeof(header));
  if (static_cast<std::uint64_t>(header[0]) != kCheckpointMagic)
    throw ConfigError("read_checkpoint: bad magic in " + path);
  if (header[1] != solver.mesh().elem_count || header[2] != solver.basis().order ||
      header[3] != solver.scheme_order())
    throw ConfigError("read_checkpoint: checkpoint does not match the configured case");
  double dheader[3];
  read_raw(in, dheader, sizeof(dheader));

  FlowState st;
  st.step_index = static_cast<int>(header[4]);
  st.time = dheader[1];
  std::int64_t depth = 0;
  read_raw(in, &depth, sizeof(depth));
  for (std::int64_t h = 0; h < depth; ++h) {
    VectorField u{solver.make_velocity_field(), solver.make_velocity_field(),
                  solver.make_velocity_field()};
    for (int d = 0; d < 3; ++d)
      read_raw(in, u[d].v.data(), u[d].v.size() * sizeof(double));
    st.u_hist.push_back(std::move(u));
  }
  st.p = solver.make_pressure_field();
  read_raw(in, st.p.v.data(), st.p.v.size() * sizeof(double));
  std::int64_t ndepth = 0;
  read_raw(in, &ndepth, sizeof(ndepth));
  for (std::int64_t h = 0; h < ndepth; ++h) {
    VectorField nh{solver.make_velocity_field(), solver.make_velocity_field(),
                   solver.make_velocity_field()};
    for (int d = 0; d < 3; ++d)
      read_raw(in, nh[d].v.data(), nh[d].v.size() * sizeof(double));
    st.n_hist.push_back(std::move(nh));
  }
  return st;
}

} // namespace sembox
