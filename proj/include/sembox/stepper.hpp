#ifndef SEMBOX_STEPPER_HPP
#define SEMBOX_STEPPER_HPP

#include <array>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sembox/basis.hpp"
#include "sembox/field.hpp"
#include "sembox/gather.hpp"
#include "sembox/krylov.hpp"
#include "sembox/mesh.hpp"
#include "sembox/operators.hpp"
#include "sembox/schwarz.hpp"

namespace sembox {

/// BDFk/EXTk coefficients for uniform steps: first the k+1 backward
/// difference weights (b0..bk, sum 0), then the k extrapolation weights
/// (a1..ak, sum 1). k in {1,2,3}.
std::pair<std::vector<double>, std::vector<double>> bdf_ext_coefficients(int order);

struct TimeScheme {
  int order = 2;
  double dt = 0.0;
  std::vector<double> bdf; // b0..bk
  std::vector<double> ext; // a1..ak
};
TimeScheme make_time_scheme(int order, double dt);

/// Forcing callback f(x, t); constant forcing wraps a vector.
using ForcingFn = std::function<std::array<double, 3>(double, double, double, double)>;
ForcingFn constant_forcing(const std::array<double, 3>& f);

enum class PrecondKind { none, jacobi, schwarz };

struct SolverSettings {
  double velocity_tolerance = 1e-8;
  double pressure_tolerance = 1e-6;
  int max_iterations = 2000;
  PrecondKind velocity_preconditioner = PrecondKind::jacobi;
  PrecondKind pressure_preconditioner = PrecondKind::schwarz;
  int projection_depth = 8;
  int schwarz_ranks = 0; // 0: one subdomain per element
  bool coarse_solve = true;
};

/// Velocity/pressure history; front() is the most recent completed step.
struct FlowState {
  double time = 0.0;
  int step_index = 0;
  std::deque<VectorField> u_hist; // u^{n-1}, u^{n-2}, ...
  std::deque<VectorField> n_hist; // advection terms at matching times
  Field p;                        // pressure at n-1

  const VectorField& velocity() const { return u_hist.front(); }
};

struct StepTelemetry {
  int step = 0;
  double time = 0.0;
  std::array<int, 3> iterations_v{0, 0, 0};
  std::array<double, 3> residuals_v{0.0, 0.0, 0.0};
  std::array<double, 3> seconds_v{0.0, 0.0, 0.0};
  double residual_v = 0.0; // worst component, relative
  int iterations_p = 0;
  double residual_p = 0.0;
  double seconds_p = 0.0;
  double divergence = 0.0; // ||div u|| after correction
  double cfl = 0.0;
  double seconds = 0.0;
};

/// One BDFk/EXTk + pressure-correction time integrator bound to a mesh and
/// discretization. Owns the operators, masks and preconditioners; the flow
/// state is explicit so tests can seed manufactured histories.
class FlowSolver {
public:
  FlowSolver(const HexMesh& mesh, int order, int scheme_order, double dt,
             double reynolds, ForcingFn forcing, SolverSettings settings = {});

  FlowState initial_state() const; // zero fields, masked
  /// Seeds full histories (newest first) for convergence studies.
  FlowState state_from_history(const std::vector<VectorField>& u_newest_first,
                               const Field& p, double time, int step_index) const;

  VectorField assemble_forcing_terms(const FlowState& state, const TimeScheme& scheme,
                                     double t_new) const;
  VectorField solve_velocity_star(const FlowState& state, const TimeScheme& scheme,
                                  const VectorField& fn, StepTelemetry& tel) const;
  Field solve_pressure_update(const VectorField& u_star, const TimeScheme& scheme,
                              StepTelemetry& tel);
  void correct_fields(FlowState& state, VectorField u_star, const Field& dp,
                      const TimeScheme& scheme, StepTelemetry& tel) const;

  /// One full step: forcing assembly, Helmholtz solve, pressure update,
  /// correction, history rotation. Startup ramps the scheme order.
  StepTelemetry advance(FlowState& state);

  /// Consistent Poisson operator E = div o inv-mass o grad (masked, assembled).
  void apply_pressure_operator(const Field& p, Field& out) const;
  Field pressure_operator_diagonal() const;
  /// The configured pressure preconditioner (constant-mode deflation folded in).
  PrecondFn pressure_preconditioner() const { return pressure_precond(); }
  double divergence_norm(const VectorField& u) const;
  double kinetic_energy(const VectorField& u) const;

  const HexMesh& mesh() const { return mesh_; }
  const SpectralBasis& basis() const { return basis_; }
  const PressureBasis& pressure_basis() const { return pbasis_; }
  const GeometricFactors& factors() const { return gf_; }
  const PressureGeometry& pressure_geometry() const { return pg_; }
  const GatherScatterMap& gather_map() const { return map_; }
  const Field& mask() const { return mask_; }
  const SolverSettings& settings() const { return settings_; }
  double dt() const { return dt_; }
  int scheme_order() const { return scheme_order_; }
  double reynolds() const { return reynolds_; }
  ProjectionHistory& pressure_projection() { return projection_; }

  Field make_velocity_field() const { return Field(GridTag::velocity, mesh_.elem_count, basis_.n()); }
  Field make_pressure_field() const { return Field(GridTag::pressure, mesh_.elem_count, pbasis_.m()); }

private:
  const HexMesh& mesh_;
  SpectralBasis basis_;
  PressureBasis pbasis_;
  GeometricFactors gf_;
  PressureGeometry pg_;
  GatherScatterMap map_;
  Field mask_;
  Field bdiag_;     // assembled lumped mass
  Field inv_bdiag_; // mask / bdiag
  SolverSettings settings_;
  int scheme_order_;
  double dt_, reynolds_;
  ForcingFn forcing_;
  std::vector<TimeScheme> schemes_;       // index k-1
  std::vector<Field> velocity_diag_;      // Jacobi diagonals per ramp order
  Field pressure_diag_;
  SchwarzPreconditioner pressure_schwarz_;
  ProjectionHistory projection_;
  std::array<double, 3> elem_size_{0, 0, 0};

  PrecondFn velocity_precond(int ramp_order) const;
  PrecondFn pressure_precond() const;
  Field forcing_field_component(double t, int comp) const;
};

/// Binary checkpoint: fixed header (element count, order, scheme order, step
/// index, dt, time, Re), then the state fields as little-endian doubles in
/// declared order (velocity history, pressure, advection history).
void write_checkpoint(const std::string& path, const FlowSolver& solver,
                      const FlowState& state);
FlowState read_checkpoint(const std::string& path, const FlowSolver& solver);

} // namespace sembox

#endif
