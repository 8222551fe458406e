#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sembox/bench.hpp"
#include "sembox/errors.hpp"
#include "sembox/operators.hpp"
#include "sembox/parallel.hpp"

using namespace sembox;

TEST_CASE("shared-memory footprint reproduces the order-14 cutoff") {
  CHECK(kernel_shared_footprint_bytes(7) == 13312); // ~13 KB
  CHECK(kernel_shared_footprint_bytes(14) == 84600);
  CHECK(kernel_shared_footprint_bytes(15) == 102400);

  FastMemoryModel model; // 96 KB
  CHECK(model.feasible(14));
  CHECK_FALSE(model.feasible(15));
  CHECK(model.max_feasible_order() == 14);

  // direct size computation of the five kernel arrays, all admissible orders
  for (int deg = 1; deg <= 32; ++deg) {
    const std::int64_t lx = deg + 1;
    const std::int64_t direct =
        8 * (lx * lx) + 8 * (lx * lx) + 3 * (8 * lx * lx * lx);
    CHECK(kernel_shared_footprint_bytes(deg) == direct);
    if (deg > 1)
      CHECK(kernel_shared_footprint_bytes(deg) > kernel_shared_footprint_bytes(deg - 1));
  }
}

TEST_CASE("bench box dimensions multiply out and stay near-cubic") {
  for (int e : {1, 2, 32, 64, 100, 8192}) {
    const auto d = bench_box_dims(e);
    CHECK(d[0] * d[1] * d[2] == e);
    CHECK(d[0] >= d[1]);
    CHECK(d[1] >= d[2]);
  }
  CHECK(bench_box_dims(64) == std::array<int, 3>{4, 4, 4});
}

TEST_CASE("axhelm flop count formula") {
  CHECK(axhelm_flops(1, 7) == 12.0 * 4096 + 15.0 * 512);
  CHECK(axhelm_flops(10, 7) == 10 * (12.0 * 4096 + 15.0 * 512));
}

TEST_CASE("bench runs the smallest case") {
  BenchCase bc;
  bc.kernel = BenchKernel::axhelm;
  bc.elements = 1;
  bc.order = 1;
  bc.workers = 1;
  bc.repetitions = 5;
  const BenchResult r = bench_kernel(bc);
  CHECK_FALSE(r.skipped);
  CHECK(r.min_seconds > 0.0);
  CHECK(r.median_seconds >= r.min_seconds);
  CHECK(r.dof_per_second > 0.0);
  CHECK(r.gflops > 0.0);
}

TEST_CASE("bench enforces the repetition floor and the memory budget") {
  BenchCase bc;
  bc.elements = 8;
  bc.order = 3;
  bc.repetitions = 4;
  CHECK_THROWS_AS(bench_kernel(bc), ConfigError);

  bc.repetitions = 5;
  const BenchResult skipped = bench_kernel(bc, 0, /*memory_budget_bytes=*/1);
  CHECK(skipped.skipped);
  CHECK_FALSE(skipped.skip_reason.empty());
}

TEST_CASE("benchmarked kernel output is identical to a direct application") {
  // the harness calls the same kernel; check determinism of repeated applies
  const HexMesh mesh = build_box_mesh(2, 2, 2, {0, 0, 0}, {1, 1, 1}, {false, false, false});
  const SpectralBasis basis = build_gll_basis(5);
  const GeometricFactors gf = build_geometric_factors(mesh, basis, false);
  Field u(GridTag::velocity, mesh.elem_count, basis.n());
  for (std::int64_t a = 0; a < u.size(); ++a) u.v[a] = std::sin(0.01 * a);
  HelmholtzCoeffs hc{1.0, 1.0, nullptr, nullptr};
  set_worker_count(1);
  const Field once = axhelm(u, hc, gf, basis);
  set_worker_count(2);
  Field repeated(GridTag::velocity, mesh.elem_count, basis.n());
  for (int rep = 0; rep < 3; ++rep) axhelm(u, hc, gf, basis, repeated);
  CHECK(once.v == repeated.v);
}

TEST_CASE("sweep emits deterministic rows and survives skips") {
  SweepConfig cfg;
  cfg.kernels = {BenchKernel::axhelm, BenchKernel::gs_sum};
  cfg.elements = {2, 4};
  cfg.orders = {2};
  cfg.workers = {1};
  cfg.repetitions = 5;
  const auto results = bench_sweep(cfg);
  REQUIRE(results.size() == 4);
  CHECK(results[0].kernel == BenchKernel::axhelm);
  CHECK(results[0].elements == 2);
  CHECK(results[1].elements == 4);
  CHECK(results[2].kernel == BenchKernel::gs_sum);

  const std::string csv = bench_results_csv(results);
  CHECK(csv.rfind("kernel,E,N,workers,reps,min_s,median_s,dof_per_s,gflops\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  SweepConfig empty = cfg;
  empty.elements = {};
  CHECK(bench_results_csv(bench_sweep(empty)) ==
        "kernel,E,N,workers,reps,min_s,median_s,dof_per_s,gflops\n");

  SweepConfig tiny = cfg;
  tiny.memory_budget_bytes = 1;
  const auto skipped = bench_sweep(tiny);
  REQUIRE(skipped.size() == 4);
  for (const auto& r : skipped) CHECK(r.skipped);
  const std::string scsv = bench_results_csv(skipped);
  CHECK(scsv.find("nan") != std::string::npos);
}

TEST_CASE("doubling repetitions keeps the median stable") {
  BenchCase bc;
  bc.kernel = BenchKernel::axhelm;
  bc.elements = 1024; // long enough per repetition to make the median steady
  bc.order = 7;
  bc.workers = 1;
  bc.repetitions = 5;
  const BenchResult a = bench_kernel(bc);
  bc.repetitions = 10;
  const BenchResult b = bench_kernel(bc);
  REQUIRE_FALSE(a.skipped);
  REQUIRE_FALSE(b.skipped);
  CHECK(std::abs(a.median_seconds - b.median_seconds) <= 0.2 * a.median_seconds);
}
