#ifndef SEMBOX_GATHER_HPP
#define SEMBOX_GATHER_HPP

#include <cstdint>
#include <vector>

#include "sembox/field.hpp"
#include "sembox/mesh.hpp"

namespace sembox {

/// Direct-stiffness-summation map (Q Q^T): which local velocity-grid nodes
/// share a global id, and in which fixed order their values are accumulated.
struct GatherScatterMap {
  int elem_count = 0;
  int n1d = 0; // velocity grid, N+1
  std::int64_t global_count = 0;

  std::vector<std::int64_t> gid;     // per local node
  std::vector<std::int32_t> mult;    // copies sharing this node's gid
  std::vector<double> inv_mult;      // 1/mult, for weighted inner products

  // Local node indices grouped by gid, ascending (element, local index)
  // within a group; groups ascending by gid.
  std::vector<std::int64_t> group_offsets; // global_count+1
  std::vector<std::int64_t> group_nodes;

  std::int64_t node_count() const { return static_cast<std::int64_t>(gid.size()); }
};

/// Nodes coincident in physical space (including across periodic wraps) get
/// one global id. Pure grid-index arithmetic, no floating-point comparisons.
GatherScatterMap build_gather_scatter(const HexMesh& mesh, int degree);

/// Replaces every local value by the sum over all copies of its global id.
/// Accumulation order within a gid is fixed, so the result is bitwise
/// independent of the worker count.
Field gs_sum(const GatherScatterMap& map, const Field& field);
void gs_sum_inplace(const GatherScatterMap& map, Field& field);

} // namespace sembox

#endif
