#ifndef SEMBOX_CONFIG_HPP
#define SEMBOX_CONFIG_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sembox/bench.hpp"
#include "sembox/stepper.hpp"

namespace sembox {

struct MeshConfig {
  std::array<int, 3> elements{1, 1, 1};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::array<bool, 3> periodic{false, false, false};
  bool operator==(const MeshConfig&) const = default;
};

struct TimeConfig {
  int scheme_order = 2;
  double dt = 0.01;
  int steps = 0;
  bool operator==(const TimeConfig&) const = default;
};

struct SolverConfig {
  double velocity_tolerance = 1e-8;
  double pressure_tolerance = 1e-6;
  int max_iterations = 2000;
  std::string velocity_preconditioner = "jacobi";
  std::string pressure_preconditioner = "schwarz";
  int projection_depth = 8;
  int schwarz_ranks = 0;
  bool coarse_solve = true;
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::string telemetry = "telemetry.csv";
  std::string solver_log = "solves.csv";
  std::string checkpoint = "final.chk";
  std::string mesh_dump; // empty: no dump
  bool operator==(const OutputConfig&) const = default;
};

struct BenchConfig {
  std::vector<std::string> kernels{"axhelm"};
  std::vector<int> elements{32, 64, 128, 256, 512, 1024, 2048, 4096, 8192};
  std::vector<int> orders{7, 9};
  std::vector<int> workers{1};
  int repetitions = 5;
  int memory_budget_mb = 6144;
  std::string output = "bench.csv";
  bool operator==(const BenchConfig&) const = default;
};

struct CommsimConfig {
  int ranks = 8;
  std::vector<int> virtual_node_sizes; // empty: all divisors of ranks
  std::string mesh_dump;               // empty: use the main mesh section
  std::string partition_file;          // empty: RCB
  std::string output = "comm.csv";
  bool operator==(const CommsimConfig&) const = default;
};

struct RunConfig {
  std::string case_name = "run";
  MeshConfig mesh;
  int order = 7;
  TimeConfig time;
  double reynolds = 100.0;
  std::array<double, 3> forcing{0.0, 0.0, 0.0};
  SolverConfig solver;
  OutputConfig output;
  BenchConfig bench;
  CommsimConfig commsim;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON config file. Unknown keys are rejected with
/// the offending key named; invariant violations name the field.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Canonical serialization (sorted keys); parse o serialize o parse is the
/// identity.
std::string serialize_config(const RunConfig& config);

/// Conversions used by run drivers.
HexMesh build_mesh(const MeshConfig& mesh);
SolverSettings solver_settings(const SolverConfig& solver);
PrecondKind precond_from_name(const std::string& name);

} // namespace sembox

#endif
