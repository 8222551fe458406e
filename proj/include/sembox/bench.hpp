#ifndef SEMBOX_BENCH_HPP
#define SEMBOX_BENCH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sembox {

/// Shared-memory footprint of the Helmholtz kernel working set: two 2D and
/// three 3D double-precision arrays of extent N+1 per direction.
std::int64_t kernel_shared_footprint_bytes(int degree);

/// Fast-memory capacity model; the 96 KB default reproduces the order-14
/// feasibility cutoff.
struct FastMemoryModel {
  std::int64_t capacity_bytes = 96 * 1024;

  bool feasible(int degree) const {
    return kernel_shared_footprint_bytes(degree) <= capacity_bytes;
  }
  int max_feasible_order(int degree_cap = 32) const;
};

enum class BenchKernel { axhelm, gs_sum, full_step };

const char* bench_kernel_name(BenchKernel kernel);
BenchKernel bench_kernel_from_name(const std::string& name);

struct BenchResult {
  BenchKernel kernel = BenchKernel::axhelm;
  int elements = 0;
  int order = 0;
  int workers = 1;
  int repetitions = 0;
  double min_seconds = 0.0;
  double median_seconds = 0.0;
  double dof_per_second = 0.0;
  double gflops = 0.0;
  bool skipped = false;
  std::string skip_reason;
};

struct BenchCase {
  BenchKernel kernel = BenchKernel::axhelm;
  int elements = 0;
  int order = 0;
  int workers = 1;
  int repetitions = 5;
};

/// Analytic flop count of one axhelm application (two contraction sweeps
/// plus the metric combination): E * (12 (N+1)^4 + 15 (N+1)^3).
double axhelm_flops(int elements, int degree);

/// Near-cubic box dimensions with exactly `elements` elements.
std::array<int, 3> bench_box_dims(int elements);

/// Times one kernel: a warmup application, then `repetitions` timed ones,
/// reporting min and median. Out-of-memory becomes a skipped result.
BenchResult bench_kernel(const BenchCase& bench_case, std::uint64_t seed = 0,
                         std::int64_t memory_budget_bytes = 6LL << 30);

struct SweepConfig {
  std::vector<BenchKernel> kernels{BenchKernel::axhelm};
  std::vector<int> elements;
  std::vector<int> orders;
  std::vector<int> workers{1};
  int repetitions = 5;
  std::uint64_t seed = 0;
  std::int64_t memory_budget_bytes = 6LL << 30;
};

/// Cartesian sweep in deterministic row order (kernel, E, N, workers).
std::vector<BenchResult> bench_sweep(const SweepConfig& config);

/// CSV with header kernel,E,N,workers,reps,min_s,median_s,dof_per_s,gflops.
std::string bench_results_csv(const std::vector<BenchResult>& results);

} // namespace sembox

#endif
