#include <CLI11.hpp>

#include <iostream>

#include "sembox/app.hpp"
#include "sembox/errors.hpp"
#include "sembox/parallel.hpp"

namespace {

sembox::RunConfig load(const std::string& path, int workers, const std::string& output_dir,
                       std::int64_t seed_override, bool seed_set) {
  sembox::RunConfig cfg = sembox::parse_config(path);
  if (workers > 0) sembox::set_worker_count(workers);
  if (!output_dir.empty()) cfg.output.directory = output_dir;
  if (seed_set) cfg.seed = static_cast<std::uint64_t>(seed_override);
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"sembox: desk-scale spectral-element incompressible flow solver and "
               "performance models"};
  app.require_subcommand(1);

  int workers = 0;
  std::string output_dir;
  std::int64_t seed = 0;
  bool seed_set = false;
  app.add_option("--workers", workers, "worker threads (default: available parallelism)");
  app.add_option("--output-dir", output_dir, "override the config's output directory");
  app.add_option("--seed", seed, "override the config's seed")->each([&](const std::string&) {
    seed_set = true;
  });

  std::string solve_cfg, bench_cfg, commsim_cfg;
  auto* solve = app.add_subcommand("solve", "time-integrate a configured case");
  solve->add_option("config", solve_cfg, "JSON config file")->required();

  auto* validate = app.add_subcommand("validate", "run the invariant suites");
  bool mutate = false;
  validate->add_flag("--mutate-axhelm", mutate,
                     "deliberately break the Helmholtz kernel to prove the oracle "
                     "suite catches it (self-check; expect failures)");

  auto* bench = app.add_subcommand("bench", "kernel/solver throughput sweep");
  bench->add_option("config", bench_cfg, "JSON config file")->required();

  auto* commsim = app.add_subcommand("commsim", "communication volume model");
  commsim->add_option("config", commsim_cfg, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      sembox::run_solve(load(solve_cfg, workers, output_dir, seed, seed_set), std::cout);
      return 0;
    }
    if (validate->parsed()) {
      if (workers > 0) sembox::set_worker_count(workers);
      sembox::ValidateOptions opt;
      opt.mutate_axhelm = mutate;
      opt.seed = static_cast<std::uint64_t>(seed);
      const auto results = sembox::run_validate(opt);
      return sembox::print_validate_report(results, std::cout) ? 0 : 1;
    }
    if (bench->parsed()) {
      sembox::run_bench(load(bench_cfg, workers, output_dir, seed, seed_set), std::cout);
      return 0;
    }
    if (commsim->parsed()) {
      sembox::run_commsim(load(commsim_cfg, workers, output_dir, seed, seed_set), std::cout);
      return 0;
    }
  } catch (const sembox::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
