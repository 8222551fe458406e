#include "sembox/gather.hpp"

#include <algorithm>
#include <numeric>

#include "sembox/parallel.hpp"

namespace sembox {

GatherScatterMap build_gather_scatter(const HexMesh& mesh, int degree) {
  if (!mesh.structured())
    throw ContractViolation("build_gather_scatter: requires a structured mesh");
  if (degree < 1) throw ContractViolation("build_gather_scatter: degree must be >= 1");

  // Continuous node lattice: element ix contributes grid indices ix*N..ix*N+N
  // per direction; periodic directions wrap modulo ex*N.
  const int n = degree + 1;
  const std::array<int, 3> counts{mesh.ex, mesh.ey, mesh.ez};
  std::array<std::int64_t, 3> gdim;
  for (int d = 0; d < 3; ++d) {
    const std::int64_t span = static_cast<std::int64_t>(counts[d]) * degree;
    gdim[d] = mesh.periodic[d] ? span : span + 1;
  }

  GatherScatterMap map;
  map.elem_count = mesh.elem_count;
  map.n1d = n;
  const std::int64_t nodes =
      static_cast<std::int64_t>(mesh.elem_count) * n * n * n;
  map.gid.assign(nodes, 0);

  parallel_for(mesh.elem_count, [&](std::int64_t e) {
    const auto cell = mesh.elem_coords(static_cast<int>(e));
    std::int64_t a = e * n * n * n;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i, ++a) {
          const std::array<int, 3> loc{i, j, k};
          std::array<std::int64_t, 3> g;
          for (int d = 0; d < 3; ++d) {
            g[d] = static_cast<std::int64_t>(cell[d]) * degree + loc[d];
            if (mesh.periodic[d]) g[d] %= gdim[d];
          }
          map.gid[a] = g[0] + gdim[0] * (g[1] + gdim[1] * g[2]);
        }
  });

  // Compress ids and group copies; groups sorted by gid, copies by local index.
  std::vector<std::int64_t> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    if (map.gid[a] != map.gid[b]) return map.gid[a] < map.gid[b];
    return a < b;
  });

  map.group_nodes = order;
  map.group_offsets.clear();
  map.group_offsets.push_back(0);
  std::vector<std::int64_t> compressed(nodes, 0);
  std::int64_t ngroups = 0;
  for (std::int64_t a = 0; a < nodes;) {
    std::int64_t b = a;
    while (b < nodes && map.gid[order[b]] == map.gid[order[a]]) ++b;
    for (std::int64_t c = a; c < b; ++c) compressed[order[c]] = ngroups;
    map.group_offsets.push_back(b);
    ++ngroups;
    a = b;
  }
  map.gid = std::move(compressed);
  map.global_count = ngroups;

  map.mult.assign(nodes, 0);
  map.inv_mult.assign(nodes, 0.0);
  parallel_for(ngroups, [&](std::int64_t g) {
    const std::int64_t lo = map.group_offsets[g], hi = map.group_offsets[g + 1];
    const auto m = static_cast<std::int32_t>(hi - lo);
    for (std::int64_t c = lo; c < hi; ++c) {
      map.mult[map.group_nodes[c]] = m;
      map.inv_mult[map.group_nodes[c]] = 1.0 / m;
    }
  });
  return map;
}

void gs_sum_inplace(const GatherScatterMap& map, Field& field) {
  if (field.tag != GridTag::velocity || field.elem_count != map.elem_count ||
      field.n1d != map.n1d)
    throw ContractViolation("gs_sum: field does not match gather-scatter map");
  parallel_for_ranges(map.global_count, [&](std::int64_t glo, std::int64_t ghi) {
    for (std::int64_t g = glo; g < ghi; ++g) {
      const std::int64_t lo = map.group_offsets[g], hi = map.group_offsets[g + 1];
      if (hi - lo == 1) continue;
      double s = 0.0;
      for (std::int64_t c = lo; c < hi; ++c) s += field.v[map.group_nodes[c]];
      for (std::int64_t c = lo; c < hi; ++c) field.v[map.group_nodes[c]] = s;
    }
  });
}

Field gs_sum(const GatherScatterMap& map, const Field& field) {
  Field out = field;
  gs_sum_inplace(map, out);
  return out;
}

} // namespace sembox
