#ifndef SEMBOX_COMM_MODEL_HPP
#define SEMBOX_COMM_MODEL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sembox/mesh.hpp"

namespace sembox {

/// Element face-adjacency with per-face message sizes and the partition
/// assignment. Every physical shared face appears exactly once (a pair of
/// elements joined through both an interior and a periodic face contributes
/// two entries).
struct CommGraph {
  struct FaceLink {
    int elem_a = 0;
    int elem_b = 0;
  };
  std::vector<FaceLink> faces;
  std::int64_t face_message_nodes = 0; // (N+1)^2
  std::vector<int> rank_of;
  int rank_count = 0;
};

CommGraph build_comm_graph(const HexMesh& mesh, const Partition& partition, int degree);

/// Edge cuts and total communication volume (in nodes) across ranks.
std::pair<std::int64_t, std::int64_t> count_cut_volume(const CommGraph& graph);

struct VirtualNodeReport {
  int node_size = 0; // ranks per virtual node
  std::int64_t intra_msgs = 0;
  std::int64_t inter_msgs = 0;
  std::int64_t intra_volume = 0;
  std::int64_t inter_volume = 0;
};

/// Groups contiguous rank ids into virtual nodes of each requested size and
/// splits the cut traffic into intra-node and inter-node shares.
std::vector<VirtualNodeReport> virtual_node_sweep(const CommGraph& graph,
                                                  const std::vector<int>& sizes);

enum class Decomposition { one_d, three_d };

/// Analytic block-merge factors: merging n 1d-slab blocks keeps neighbor
/// messages unchanged and divides total traffic by n; merging 8 cubes into
/// one of double edge length quadruples neighbor messages and halves the
/// total traffic.
std::pair<double, double> analytic_merge_factors(Decomposition decomposition, int n);

} // namespace sembox

#endif
