#include "sembox/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <new>
#include <random>
#include <sstream>

#include "sembox/errors.hpp"
#include "sembox/operators.hpp"
#include "sembox/parallel.hpp"
#include "sembox/stepper.hpp"

namespace sembox {

std::int64_t kernel_shared_footprint_bytes(int degree) {
  if (degree < 1) throw ConfigError("kernel_shared_footprint_bytes: degree must be >= 1");
  const std::int64_t lx = degree + 1;
  return 8 * (2 * lx * lx + 3 * lx * lx * lx);
}

int FastMemoryModel::max_feasible_order(int degree_cap) const {
  int best = 0;
  for (int n = 1; n <= degree_cap; ++n)
    if (feasible(n)) best = n;
  return best;
}

const char* bench_kernel_name(BenchKernel kernel) {
  switch (kernel) {
    case BenchKernel::axhelm: return "axhelm";
    case BenchKernel::gs_sum: return "gs_sum";
    case BenchKernel::full_step: return "full_step";
  }
  return "?";
}

BenchKernel bench_kernel_from_name(const std::string& name) {
  if (name == "axhelm") return BenchKernel::axhelm;
  if (name == "gs_sum") return BenchKernel::gs_sum;
  if (name == "full_step") return BenchKernel::full_step;
  throw ConfigError("unknown bench kernel '" + name + "'");
}

double axhelm_flops(int elements, int degree) {
  const double n = degree + 1;
  return elements * (12.0 * n * n * n * n + 15.0 * n * n * n);
}

std::array<int, 3> bench_box_dims(int elements) {
  // Factor into near-cubic dims: pull prime factors, feed the smallest axis.
  std::array<int, 3> dims{1, 1, 1};
  int rest = elements;
  for (int f = 2; f * f <= rest; ++f)
    while (rest % f == 0) {
      *std::min_element(dims.begin(), dims.end()) *= f;
      rest /= f;
    }
  if (rest > 1) *std::min_element(dims.begin(), dims.end()) *= rest;
  std::sort(dims.begin(), dims.end(), std::greater<int>());
  return dims;
}

namespace {

struct Timing {
  double min_s = 0.0;
  double median_s = 0.0;
};

template <typename Fn>
Timing time_reps(int reps, Fn&& fn) {
  fn(); // warmup
  std::vector<double> t(reps);
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    t[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::sort(t.begin(), t.end());
  return {t.front(), t[t.size() / 2]};
}

void fill_random(Field& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : f.v) v = dist(rng);
}

} // namespace

BenchResult bench_kernel(const BenchCase& bc, std::uint64_t seed,
                         std::int64_t memory_budget_bytes) {
  if (bc.repetitions < 5)
    throw ConfigError("bench_kernel: repetitions must be >= 5");
  BenchResult res;
  res.kernel = bc.kernel;
  res.elements = bc.elements;
  res.order = bc.order;
  res.workers = bc.workers;
  res.repetitions = bc.repetitions;

  const std::int64_t nodes =
      static_cast<std::int64_t>(bc.elements) * (bc.order + 1) * (bc.order + 1) *
      (bc.order + 1);
  // rough working set: fields + metric terms + gather map
  const std::int64_t estimate = nodes * 8 * (bc.kernel == BenchKernel::full_step ? 40 : 14);
  if (estimate > memory_budget_bytes) {
    res.skipped = true;
    res.skip_reason = "estimated working set exceeds memory budget";
    return res;
  }

  const int saved_workers = worker_count();
  set_worker_count(bc.workers);
  try {
    const auto dims = bench_box_dims(bc.elements);
    Timing timing;
    double flops_per_rep = 0.0;

    if (bc.kernel == BenchKernel::axhelm) {
      const HexMesh mesh = build_box_mesh(dims[0], dims[1], dims[2], {0, 0, 0},
                                          {1, 1, 1}, {false, false, false});
      const SpectralBasis basis = build_gll_basis(bc.order);
      const GeometricFactors gf =
          build_geometric_factors(mesh, basis, /*with_gradients=*/false);
      Field u(GridTag::velocity, mesh.elem_count, basis.n());
      fill_random(u, seed + 1);
      Field out(GridTag::velocity, mesh.elem_count, basis.n());
      HelmholtzCoeffs hc;
      hc.h1 = 1.0;
      hc.h2 = 1.0;
      timing = time_reps(bc.repetitions, [&] { axhelm(u, hc, gf, basis, out); });
      flops_per_rep = axhelm_flops(bc.elements, bc.order);
    } else if (bc.kernel == BenchKernel::gs_sum) {
      const HexMesh mesh = build_box_mesh(dims[0], dims[1], dims[2], {0, 0, 0},
                                          {1, 1, 1}, {false, false, false});
      const GatherScatterMap map = build_gather_scatter(mesh, bc.order);
      Field u(GridTag::velocity, mesh.elem_count, bc.order + 1);
      fill_random(u, seed + 2);
      timing = time_reps(bc.repetitions, [&] { gs_sum_inplace(map, u); });
      flops_per_rep = static_cast<double>(nodes); // one add per local copy
    } else {
      if (bc.order < 3) throw ConfigError("bench_kernel: full_step needs order >= 3");
      const HexMesh mesh = build_box_mesh(dims[0], dims[1], dims[2], {0, 0, 0},
                                          {1, 1, 1}, {true, true, true});
      SolverSettings settings;
      settings.velocity_tolerance = 1e-8;
      settings.pressure_tolerance = 1e-6;
      settings.projection_depth = 8;
      FlowSolver solver(mesh, bc.order, 2, 1e-3, 100.0,
                        constant_forcing({1.0, 0.0, 0.0}), settings);
      FlowState state = solver.initial_state();
      std::int64_t applies = 0;
      timing = time_reps(bc.repetitions, [&] {
        const StepTelemetry tel = solver.advance(state);
        applies += tel.iterations_v[0] + tel.iterations_v[1] + tel.iterations_v[2] +
                   tel.iterations_p + 4;
      });
      // rough flop proxy: operator applications at axhelm cost
      flops_per_rep = axhelm_flops(bc.elements, bc.order) *
                      (static_cast<double>(applies) / (bc.repetitions + 1));
    }
    res.min_seconds = timing.min_s;
    res.median_seconds = timing.median_s;
    res.dof_per_second = static_cast<double>(nodes) / timing.min_s;
    res.gflops = flops_per_rep / timing.min_s / 1e9;
  } catch (const std::bad_alloc&) {
    res.skipped = true;
    res.skip_reason = "allocation failed";
  }
  set_worker_count(saved_workers);
  return res;
}

std::vector<BenchResult> bench_sweep(const SweepConfig& config) {
  std::vector<BenchResult> out;
  for (BenchKernel kernel : config.kernels)
    for (int e : config.elements)
      for (int order : config.orders)
        for (int w : config.workers) {
          BenchCase bc{kernel, e, order, w, config.repetitions};
          try {
            out.push_back(bench_kernel(bc, config.seed, config.memory_budget_bytes));
          } catch (const ConfigError&) {
            throw;
          } catch (const std::exception& ex) {
            BenchResult r;
            r.kernel = kernel;
            r.elements = e;
            r.order = order;
            r.workers = w;
            r.repetitions = config.repetitions;
            r.skipped = true;
            r.skip_reason = ex.what();
            out.push_back(r);
          }
        }
  return out;
}

std::string bench_results_csv(const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os.precision(17);
  os << "kernel,E,N,workers,reps,min_s,median_s,dof_per_s,gflops\n";
  for (const auto& r : results) {
    os << bench_kernel_name(r.kernel) << ',' << r.elements << ',' << r.order << ','
       << r.workers << ',' << r.repetitions << ',';
    if (r.skipped)
      os << "nan,nan,nan,nan";
    else
      os << r.min_seconds << ',' << r.median_seconds << ',' << r.dof_per_second << ','
         << r.gflops;
    os << '\n';
  }
  return os.str();
}

} // namespace sembox
