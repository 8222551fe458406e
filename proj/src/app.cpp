#include "sembox/app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "sembox/comm_model.hpp"
#include "sembox/errors.hpp"

namespace sembox {

namespace {

namespace fs = std::filesystem;

std::string join_output(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

} // namespace

SolveSummary run_solve(const RunConfig& config, std::ostream& log) {
  ensure_dir(config.output.directory);
  const HexMesh mesh = build_mesh(config.mesh);
  if (!config.output.mesh_dump.empty())
    write_mesh_dump(mesh, join_output(config.output.directory, config.output.mesh_dump));

  FlowSolver solver(mesh, config.order, config.time.scheme_order, config.time.dt,
                    config.reynolds, constant_forcing(config.forcing),
                    solver_settings(config.solver));
  FlowState state = solver.initial_state();

  SolveSummary summary;
  summary.telemetry_path = join_output(config.output.directory, config.output.telemetry);
  summary.checkpoint_path = join_output(config.output.directory, config.output.checkpoint);

  std::ofstream tel(summary.telemetry_path);
  if (!tel) throw ConfigError("run_solve: cannot open " + summary.telemetry_path);
  tel << "step,time,iterations_v,iterations_p,residual_v,residual_p,divergence,cfl,"
         "wall_seconds\n";
  tel.precision(17);

  std::ofstream slog(join_output(config.output.directory, config.output.solver_log));
  slog << "step,solve,iterations,residual,seconds\n";
  slog.precision(17);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    for (int s = 0; s < config.time.steps; ++s) {
      const StepTelemetry t = solver.advance(state);
      tel << t.step << ',' << t.time << ','
          << (t.iterations_v[0] + t.iterations_v[1] + t.iterations_v[2]) << ','
          << t.iterations_p << ',' << t.residual_v << ',' << t.residual_p << ','
          << t.divergence << ',' << t.cfl << ',' << t.seconds << '\n';
      tel.flush();
      const char* comp[3] = {"velocity_x", "velocity_y", "velocity_z"};
      for (int d = 0; d < 3; ++d)
        slog << t.step << ',' << comp[d] << ',' << t.iterations_v[d] << ','
             << t.residuals_v[d] << ',' << t.seconds_v[d] << '\n';
      slog << t.step << ",pressure," << t.iterations_p << ',' << t.residual_p << ','
           << t.seconds_p << '\n';
      slog.flush();
      summary.steps = t.step;
      summary.final_divergence = t.divergence;
    }
  } catch (...) {
    tel.flush();
    slog.flush();
    write_checkpoint(summary.checkpoint_path + ".partial", solver, state);
    throw;
  }
  summary.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_checkpoint(summary.checkpoint_path, solver, state);

  log << "case " << config.case_name << ": " << summary.steps << " steps, final divergence "
      << std::scientific << std::setprecision(3) << summary.final_divergence << ", "
      << std::fixed << std::setprecision(2) << summary.total_seconds << " s total\n";
  return summary;
}

std::vector<BenchResult> run_bench(const RunConfig& config, std::ostream& log) {
  ensure_dir(config.output.directory);
  SweepConfig sweep;
  sweep.kernels.clear();
  for (const auto& k : config.bench.kernels) sweep.kernels.push_back(bench_kernel_from_name(k));
  sweep.elements = config.bench.elements;
  sweep.orders = config.bench.orders;
  sweep.workers = config.bench.workers;
  sweep.repetitions = config.bench.repetitions;
  sweep.seed = config.seed;
  sweep.memory_budget_bytes = static_cast<std::int64_t>(config.bench.memory_budget_mb) << 20;

  const std::vector<BenchResult> results = bench_sweep(sweep);
  const std::string path = join_output(config.output.directory, config.bench.output);
  std::ofstream out(path);
  if (!out) throw ConfigError("run_bench: cannot open " + path);
  out << bench_results_csv(results);
  int skipped = 0;
  for (const auto& r : results) skipped += r.skipped ? 1 : 0;
  log << "bench: " << results.size() << " rows (" << skipped << " skipped) -> " << path
      << "\n";
  return results;
}

std::string run_commsim(const RunConfig& config, std::ostream& log) {
  ensure_dir(config.output.directory);
  HexMesh mesh;
  if (!config.commsim.mesh_dump.empty())
    mesh = load_mesh_dump(config.commsim.mesh_dump);
  else
    mesh = build_mesh(config.mesh);

  Partition part;
  if (!config.commsim.partition_file.empty())
    part = load_partition(config.commsim.partition_file, mesh.elem_count);
  else
    part = partition_rcb(mesh, config.commsim.ranks);

  std::vector<int> sizes = config.commsim.virtual_node_sizes;
  if (sizes.empty())
    for (int n = 1; n <= part.rank_count; ++n)
      if (part.rank_count % n == 0) sizes.push_back(n);

  const CommGraph graph = build_comm_graph(mesh, part, config.order);
  const auto reports = virtual_node_sweep(graph, sizes);

  const std::string path = join_output(config.output.directory, config.commsim.output);
  std::ofstream out(path);
  if (!out) throw ConfigError("run_commsim: cannot open " + path);
  out << "n,intra_msgs,inter_msgs,intra_volume,inter_volume\n";
  for (const auto& r : reports)
    out << r.node_size << ',' << r.intra_msgs << ',' << r.inter_msgs << ','
        << r.intra_volume << ',' << r.inter_volume << '\n';

  const auto [cuts, volume] = count_cut_volume(graph);
  log << "commsim: " << part.rank_count << " ranks, " << cuts << " edge cuts, " << volume
      << " nodes total volume -> " << path << "\n";
  return path;
}

bool print_validate_report(const std::vector<SuiteResult>& results, std::ostream& out) {
  bool all = true;
  std::size_t width = 4;
  for (const auto& r : results) width = std::max(width, r.name.size());
  for (const auto& r : results) {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << std::left << std::setw(static_cast<int>(width))
        << r.name << "  " << std::right << std::fixed << std::setprecision(2) << std::setw(8)
        << r.seconds << " s";
    if (!r.detail.empty()) out << "  " << r.detail;
    out << "\n";
    all = all && r.passed;
  }
  out << (all ? "validate: all suites passed\n" : "validate: FAILURES\n");
  return all;
}

} // namespace sembox
