#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sembox/app.hpp"
#include "sembox/comm_model.hpp"
#include "sembox/parallel.hpp"

using namespace sembox;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Telemetry rows with the wall-clock columns removed (those legitimately
// differ between reruns).
std::string strip_timing(const std::string& csv) {
  std::ostringstream out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << line.substr(0, cut) << '\n';
  }
  return out.str();
}

} // namespace

TEST_CASE("minimal config fills the documented defaults") {
  const RunConfig c = parse_config_text("{}", "inline");
  CHECK(c.time.scheme_order == 2);
  CHECK(c.solver.velocity_preconditioner == "jacobi");
  CHECK(c.solver.pressure_preconditioner == "schwarz");
  CHECK(c.solver.velocity_tolerance == 1e-8);
  CHECK(c.solver.pressure_tolerance == 1e-6);
  CHECK(c.order == 7);
  CHECK(c.seed == 0);
}

TEST_CASE("configs are validated with named fields") {
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"order": 2, "time": {"steps": 5}})", "inline"),
      doctest::Contains("order"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"time": {"dt": -0.5}})", "inline"),
                       doctest::Contains("time.dt"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"solver": {"velocity_tolerance": 1.5}})", "inline"),
      doctest::Contains("velocity_tolerance"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"solver": {"typo_key": 1}})", "inline"),
                       doctest::Contains("solver.typo_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"unknown_top": 1})", "inline"),
                       doctest::Contains("unknown_top"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{ not json", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"mesh": {"elements": [0,1,1]}})", "inline"),
                  ConfigError);
}

TEST_CASE("order 2 is fine when no pressure solve runs") {
  const RunConfig c = parse_config_text(R"({"order": 2, "time": {"steps": 0}})", "inline");
  CHECK(c.order == 2);
}

TEST_CASE("config round trip is the identity") {
  const std::string text = R"({
    "case": "roundtrip",
    "mesh": {"elements": [3,2,1], "lengths": [3.0,2.0,1.0], "periodic": [true,false,false]},
    "order": 5,
    "time": {"scheme_order": 3, "dt": 0.025, "steps": 7},
    "reynolds": 42.0,
    "forcing": [0.5, 0.0, -0.25],
    "solver": {"pressure_preconditioner": "jacobi", "projection_depth": 3},
    "seed": 9
  })";
  const RunConfig a = parse_config_text(text, "inline");
  const std::string s1 = serialize_config(a);
  const RunConfig b = parse_config_text(s1, "serialized");
  CHECK(a == b);
  CHECK(serialize_config(b) == s1);
}

TEST_CASE("the shipped fixture parses to the documented values") {
  const RunConfig c = parse_config(std::string(SEMBOX_SOURCE_DIR) + "/configs/poiseuille.json");
  CHECK(c.case_name == "poiseuille");
  CHECK(c.mesh.elements == std::array<int, 3>{4, 4, 4});
  CHECK(c.mesh.periodic == std::array<bool, 3>{true, false, true});
  CHECK(c.order == 7);
  CHECK(c.time.scheme_order == 2);
  CHECK(c.reynolds == 1.0);
  CHECK(c.forcing == std::array<double, 3>{2.0, 0.0, 0.0});
  CHECK(c.solver.projection_depth == 8);
}

TEST_CASE("zero-step solve writes only the initial checkpoint") {
  RunConfig c = parse_config_text(R"({"order": 3, "time": {"steps": 0, "dt": 0.1}})",
                                  "inline");
  c.output.directory = "test_out_zero";
  std::ostringstream log;
  const SolveSummary s = run_solve(c, log);
  CHECK(s.steps == 0);
  CHECK(fs::exists(s.checkpoint_path));
  const std::string tel = slurp(s.telemetry_path);
  CHECK(tel ==
        "step,time,iterations_v,iterations_p,residual_v,residual_p,divergence,cfl,"
        "wall_seconds\n");
  fs::remove_all("test_out_zero");
}

TEST_CASE("telemetry is deterministic apart from wall clocks") {
  const std::string text = R"({
    "case": "det",
    "mesh": {"elements": [2,2,2], "origin": [0.0,-1.0,0.0], "lengths": [2.0,2.0,2.0],
             "periodic": [true,false,true]},
    "order": 3,
    "time": {"dt": 0.05, "steps": 3},
    "reynolds": 1.0,
    "forcing": [2.0, 0.0, 0.0],
    "seed": 1
  })";
  set_worker_count(2);
  RunConfig c = parse_config_text(text, "inline");
  c.output.directory = "test_out_det_a";
  std::ostringstream log;
  const SolveSummary sa = run_solve(c, log);
  c.output.directory = "test_out_det_b";
  const SolveSummary sb = run_solve(c, log);
  CHECK(strip_timing(slurp(sa.telemetry_path)) == strip_timing(slurp(sb.telemetry_path)));
  CHECK(strip_timing(slurp("test_out_det_a/solves.csv")) ==
        strip_timing(slurp("test_out_det_b/solves.csv")));
  fs::remove_all("test_out_det_a");
  fs::remove_all("test_out_det_b");
}

TEST_CASE("commsim writes the sweep table") {
  RunConfig c = parse_config(std::string(SEMBOX_SOURCE_DIR) + "/configs/commsim_slab.json");
  c.output.directory = "test_out_comm";
  std::ostringstream log;
  const std::string path = run_commsim(c, log);
  const std::string csv = slurp(path);
  CHECK(csv.rfind("n,intra_msgs,inter_msgs,intra_volume,inter_volume\n", 0) == 0);
  // 8 periodic slab faces, 64 nodes each; merging pairs halves the traffic
  CHECK(csv.find("1,0,8,0,512") != std::string::npos);
  CHECK(csv.find("2,4,4,256,256") != std::string::npos);
  CHECK(csv.find("8,8,0,512,0") != std::string::npos);
  fs::remove_all("test_out_comm");
}

TEST_CASE("commsim consumes mesh dumps and partition files") {
  fs::create_directories("test_out_dump");
  const HexMesh m = build_box_mesh(4, 2, 1, {0, 0, 0}, {4, 2, 1}, {false, false, false});
  write_mesh_dump(m, "test_out_dump/mesh.txt");
  const Partition p = partition_rcb(m, 4);
  write_partition(p, "test_out_dump/part.txt");

  RunConfig c = parse_config_text(R"({
    "order": 4,
    "commsim": {"mesh_dump": "test_out_dump/mesh.txt",
                 "partition_file": "test_out_dump/part.txt",
                 "virtual_node_sizes": [1, 2, 4],
                 "output": "comm.csv"}
  })",
                                  "inline");
  c.output.directory = "test_out_dump";
  std::ostringstream log;
  const std::string path = run_commsim(c, log);
  const std::string csv = slurp(path);
  CHECK(csv.find("n,intra_msgs") == 0);
  // geometric adjacency of the dump matches the structured mesh
  const CommGraph direct = build_comm_graph(m, p, 4);
  const auto [cuts, volume] = count_cut_volume(direct);
  std::istringstream is(csv);
  std::string header, row1;
  std::getline(is, header);
  std::getline(is, row1);
  CHECK(row1 == "1,0," + std::to_string(cuts) + ",0," + std::to_string(volume));
  fs::remove_all("test_out_dump");
}

TEST_CASE("bench config drives a small sweep") {
  RunConfig c = parse_config_text(R"({
    "bench": {"kernels": ["gs_sum"], "elements": [2, 4], "orders": [2],
               "workers": [1], "repetitions": 5, "output": "b.csv"}
  })",
                                  "inline");
  c.output.directory = "test_out_bench";
  std::ostringstream log;
  const auto results = run_bench(c, log);
  CHECK(results.size() == 2);
  CHECK(fs::exists("test_out_bench/b.csv"));
  fs::remove_all("test_out_bench");
}

TEST_CASE("the mutation fixture breaks the operator oracle suite") {
  ValidateOptions opt;
  opt.mutate_axhelm = true;
  const auto results = run_validate(opt);
  bool oracle_failed = false;
  for (const auto& r : results)
    if (r.name == "operator-oracles") oracle_failed = !r.passed;
  CHECK(oracle_failed);
  std::ostringstream out;
  CHECK_FALSE(print_validate_report(results, out));
  CHECK(out.str().find("[FAIL]") != std::string::npos);
}
