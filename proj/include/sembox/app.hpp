#ifndef SEMBOX_APP_HPP
#define SEMBOX_APP_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "sembox/config.hpp"

namespace sembox {

struct SolveSummary {
  int steps = 0;
  double final_divergence = 0.0;
  double total_seconds = 0.0;
  std::string telemetry_path;
  std::string checkpoint_path;
};

/// Runs the configured time integration, streaming telemetry row by row (so
/// a failed solve leaves partial telemetry behind) and writing the final
/// checkpoint. Throws SolverError on divergence.
SolveSummary run_solve(const RunConfig& config, std::ostream& log);

/// Bench sweep driven by the config's bench section; writes the CSV.
std::vector<BenchResult> run_bench(const RunConfig& config, std::ostream& log);

/// Communication-volume sweep; writes n,intra_msgs,inter_msgs,intra_volume,
/// inter_volume rows.
std::string run_commsim(const RunConfig& config, std::ostream& log);

struct ValidateOptions {
  bool mutate_axhelm = false; // documented self-check: breaks the kernel on purpose
  std::uint64_t seed = 0;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

/// Runs the invariant suites (basis exactness, operator oracles, adjoint
/// pair, XXT, divergence bound, temporal order) and returns per-suite
/// results.
std::vector<SuiteResult> run_validate(const ValidateOptions& options);

/// Pretty table; returns true when everything passed.
bool print_validate_report(const std::vector<SuiteResult>& results, std::ostream& out);

} // namespace sembox

#endif
