#include "sembox/comm_model.hpp"

#include "sembox/errors.hpp"

namespace sembox {

CommGraph build_comm_graph(const HexMesh& mesh, const Partition& partition, int degree) {
  if (static_cast<int>(partition.rank_of.size()) != mesh.elem_count)
    throw ContractViolation("build_comm_graph: partition does not match mesh");
  CommGraph g;
  g.face_message_nodes = static_cast<std::int64_t>(degree + 1) * (degree + 1);
  g.rank_of = partition.rank_of;
  g.rank_count = partition.rank_count;

  if (mesh.structured()) {
    // Positive directions only: every physical face exactly once. A pair
    // joined twice (two-element periodic row) yields two entries.
    for (int e = 0; e < mesh.elem_count; ++e)
      for (int d = 0; d < 3; ++d) {
        const int nb = mesh.neighbors[e][2 * d + 1];
        if (nb >= 0 && nb != e) g.faces.push_back({e, nb});
      }
  } else {
    for (int e = 0; e < mesh.elem_count; ++e)
      for (int f = 0; f < 6; ++f) {
        const int nb = mesh.neighbors[e][f];
        if (nb > e) g.faces.push_back({e, nb}); // each geometric face once
      }
  }
  return g;
}

std::pair<std::int64_t, std::int64_t> count_cut_volume(const CommGraph& graph) {
  std::int64_t cuts = 0;
  for (const auto& f : graph.faces)
    if (graph.rank_of[f.elem_a] != graph.rank_of[f.elem_b]) ++cuts;
  return {cuts, cuts * graph.face_message_nodes};
}

std::vector<VirtualNodeReport> virtual_node_sweep(const CommGraph& graph,
                                                  const std::vector<int>& sizes) {
  std::vector<VirtualNodeReport> out;
  out.reserve(sizes.size());
  for (int n : sizes) {
    if (n < 1 || graph.rank_count % n != 0)
      throw ConfigError("virtual_node_sweep: node size " + std::to_string(n) +
                        " does not divide rank count " +
                        std::to_string(graph.rank_count));
    VirtualNodeReport rep;
    rep.node_size = n;
    for (const auto& f : graph.faces) {
      const int ra = graph.rank_of[f.elem_a], rb = graph.rank_of[f.elem_b];
      if (ra == rb) continue; // not a message at all
      if (ra / n == rb / n) {
        ++rep.intra_msgs;
        rep.intra_volume += graph.face_message_nodes;
      } else {
        ++rep.inter_msgs;
        rep.inter_volume += graph.face_message_nodes;
      }
    }
    out.push_back(rep);
  }
  return out;
}

std::pair<double, double> analytic_merge_factors(Decomposition decomposition, int n) {
  if (n < 1) throw ConfigError("analytic_merge_factors: n must be >= 1");
  if (decomposition == Decomposition::one_d) return {1.0, 1.0 / n};
  if (n != 8)
    throw ConfigError("analytic_merge_factors: the 3d model is defined for n = 8 "
                      "(doubling the block edge), got n = " + std::to_string(n));
  return {4.0, 0.5};
}

} // namespace sembox
