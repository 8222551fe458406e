#include "sembox/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sembox/errors.hpp"

namespace sembox {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) +
                        "'");
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T, std::size_t N>
void get_array(const json& j, const char* key, std::array<T, N>& out,
               const std::string& where) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N)
    throw ConfigError("config: '" + where + "." + key + "' must be an array of " +
                      std::to_string(N));
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<T>();
}

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config: invalid '" + field + "': " + what);
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + origin + ": " + e.what());
  }
  RunConfig c;
  reject_unknown_keys(j, {"case", "mesh", "order", "time", "reynolds", "forcing",
                          "solver", "output", "bench", "commsim", "seed"},
                      "");
  get_if_present(j, "case", c.case_name);
  get_if_present(j, "order", c.order);
  get_if_present(j, "reynolds", c.reynolds);
  get_array(j, "forcing", c.forcing, "");
  get_if_present(j, "seed", c.seed);

  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    reject_unknown_keys(m, {"elements", "origin", "lengths", "periodic"}, "mesh");
    get_array(m, "elements", c.mesh.elements, "mesh");
    get_array(m, "origin", c.mesh.origin, "mesh");
    get_array(m, "lengths", c.mesh.lengths, "mesh");
    get_array(m, "periodic", c.mesh.periodic, "mesh");
  }
  if (j.contains("time")) {
    const auto& t = j.at("time");
    reject_unknown_keys(t, {"scheme_order", "dt", "steps"}, "time");
    get_if_present(t, "scheme_order", c.time.scheme_order);
    get_if_present(t, "dt", c.time.dt);
    get_if_present(t, "steps", c.time.steps);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    reject_unknown_keys(s,
                        {"velocity_tolerance", "pressure_tolerance", "max_iterations",
                         "velocity_preconditioner", "pressure_preconditioner",
                         "projection_depth", "schwarz_ranks", "coarse_solve"},
                        "solver");
    get_if_present(s, "velocity_tolerance", c.solver.velocity_tolerance);
    get_if_present(s, "pressure_tolerance", c.solver.pressure_tolerance);
    get_if_present(s, "max_iterations", c.solver.max_iterations);
    get_if_present(s, "velocity_preconditioner", c.solver.velocity_preconditioner);
    get_if_present(s, "pressure_preconditioner", c.solver.pressure_preconditioner);
    get_if_present(s, "projection_depth", c.solver.projection_depth);
    get_if_present(s, "schwarz_ranks", c.solver.schwarz_ranks);
    get_if_present(s, "coarse_solve", c.solver.coarse_solve);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown_keys(o, {"directory", "telemetry", "solver_log", "checkpoint", "mesh_dump"},
                        "output");
    get_if_present(o, "directory", c.output.directory);
    get_if_present(o, "telemetry", c.output.telemetry);
    get_if_present(o, "solver_log", c.output.solver_log);
    get_if_present(o, "checkpoint", c.output.checkpoint);
    get_if_present(o, "mesh_dump", c.output.mesh_dump);
  }
  if (j.contains("bench")) {
    const auto& b = j.at("bench");
    reject_unknown_keys(b,
                        {"kernels", "elements", "orders", "workers", "repetitions",
                         "memory_budget_mb", "output"},
                        "bench");
    get_if_present(b, "kernels", c.bench.kernels);
    get_if_present(b, "elements", c.bench.elements);
    get_if_present(b, "orders", c.bench.orders);
    get_if_present(b, "workers", c.bench.workers);
    get_if_present(b, "repetitions", c.bench.repetitions);
    get_if_present(b, "memory_budget_mb", c.bench.memory_budget_mb);
    get_if_present(b, "output", c.bench.output);
  }
  if (j.contains("commsim")) {
    const auto& cs = j.at("commsim");
    reject_unknown_keys(
        cs, {"ranks", "virtual_node_sizes", "mesh_dump", "partition_file", "output"},
        "commsim");
    get_if_present(cs, "ranks", c.commsim.ranks);
    get_if_present(cs, "virtual_node_sizes", c.commsim.virtual_node_sizes);
    get_if_present(cs, "mesh_dump", c.commsim.mesh_dump);
    get_if_present(cs, "partition_file", c.commsim.partition_file);
    get_if_present(cs, "output", c.commsim.output);
  }

  // Invariants, named by field.
  for (int d = 0; d < 3; ++d) {
    check(c.mesh.elements[d] >= 1, "mesh.elements", "counts must be >= 1");
    check(c.mesh.lengths[d] > 0.0, "mesh.lengths", "extents must be positive");
  }
  check(c.order >= 1 && c.order <= 32, "order", "must be in [1,32]");
  check(c.time.scheme_order >= 1 && c.time.scheme_order <= 3, "time.scheme_order",
        "must be 1, 2 or 3");
  check(c.time.dt > 0.0, "time.dt", "must be positive");
  check(c.time.steps >= 0, "time.steps", "must be >= 0");
  check(c.reynolds > 0.0, "reynolds", "must be positive");
  check(c.solver.velocity_tolerance > 0.0 && c.solver.velocity_tolerance < 1.0,
        "solver.velocity_tolerance", "must be in (0,1)");
  check(c.solver.pressure_tolerance > 0.0 && c.solver.pressure_tolerance < 1.0,
        "solver.pressure_tolerance", "must be in (0,1)");
  check(c.solver.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
  check(c.solver.projection_depth >= 0, "solver.projection_depth", "must be >= 0");
  check(c.solver.schwarz_ranks >= 0, "solver.schwarz_ranks", "must be >= 0");
  precond_from_name(c.solver.velocity_preconditioner);
  precond_from_name(c.solver.pressure_preconditioner);
  if (c.time.steps > 0)
    check(c.order >= 3, "order",
          "must be >= 3 when the pressure solve is enabled (steps > 0)");
  check(c.bench.repetitions >= 5, "bench.repetitions", "must be >= 5");
  check(c.commsim.ranks >= 1, "commsim.ranks", "must be >= 1");
  for (const auto& k : c.bench.kernels) bench_kernel_from_name(k);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["case"] = c.case_name;
  j["mesh"]["elements"] = c.mesh.elements;
  j["mesh"]["origin"] = c.mesh.origin;
  j["mesh"]["lengths"] = c.mesh.lengths;
  j["mesh"]["periodic"] = c.mesh.periodic;
  j["order"] = c.order;
  j["time"]["scheme_order"] = c.time.scheme_order;
  j["time"]["dt"] = c.time.dt;
  j["time"]["steps"] = c.time.steps;
  j["reynolds"] = c.reynolds;
  j["forcing"] = c.forcing;
  j["solver"]["velocity_tolerance"] = c.solver.velocity_tolerance;
  j["solver"]["pressure_tolerance"] = c.solver.pressure_tolerance;
  j["solver"]["max_iterations"] = c.solver.max_iterations;
  j["solver"]["velocity_preconditioner"] = c.solver.velocity_preconditioner;
  j["solver"]["pressure_preconditioner"] = c.solver.pressure_preconditioner;
  j["solver"]["projection_depth"] = c.solver.projection_depth;
  j["solver"]["schwarz_ranks"] = c.solver.schwarz_ranks;
  j["solver"]["coarse_solve"] = c.solver.coarse_solve;
  j["output"]["directory"] = c.output.directory;
  j["output"]["telemetry"] = c.output.telemetry;
  j["output"]["solver_log"] = c.output.solver_log;
  j["output"]["checkpoint"] = c.output.checkpoint;
  j["output"]["mesh_dump"] = c.output.mesh_dump;
  j["bench"]["kernels"] = c.bench.kernels;
  j["bench"]["elements"] = c.bench.elements;
  j["bench"]["orders"] = c.bench.orders;
  j["bench"]["workers"] = c.bench.workers;
  j["bench"]["repetitions"] = c.bench.repetitions;
  j["bench"]["memory_budget_mb"] = c.bench.memory_budget_mb;
  j["bench"]["output"] = c.bench.output;
  j["commsim"]["ranks"] = c.commsim.ranks;
  j["commsim"]["virtual_node_sizes"] = c.commsim.virtual_node_sizes;
  j["commsim"]["mesh_dump"] = c.commsim.mesh_dump;
  j["commsim"]["partition_file"] = c.commsim.partition_file;
  j["commsim"]["output"] = c.commsim.output;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

HexMesh build_mesh(const MeshConfig& mesh) {
  return build_box_mesh(mesh.elements[0], mesh.elements[1], mesh.elements[2], mesh.origin,
                        mesh.lengths, mesh.periodic);
}

PrecondKind precond_from_name(const std::string& name) {
  if (name == "none") return PrecondKind::none;
  if (name == "jacobi") return PrecondKind::jacobi;
  if (name == "schwarz") return PrecondKind::schwarz;
  throw ConfigError("config: unknown preconditioner '" + name + "'");
}

SolverSettings solver_settings(const SolverConfig& solver) {
  SolverSettings s;
  s.velocity_tolerance = solver.velocity_tolerance;
  s.pressure_tolerance = solver.pressure_tolerance;
  s.max_iterations = solver.max_iterations;
  s.velocity_preconditioner = precond_from_name(solver.velocity_preconditioner);
  s.pressure_preconditioner = precond_from_name(solver.pressure_preconditioner);
  s.projection_depth = solver.projection_depth;
  s.schwarz_ranks = solver.schwarz_ranks;
  s.coarse_solve = solver.coarse_solve;
  return s;
}

} // namespace sembox
