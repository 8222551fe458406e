#ifndef SEMBOX_MESH_HPP
#define SEMBOX_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sembox {

/// Structured hexahedral box mesh with trilinear element geometry. Elements
/// are ordered lexicographically, x fastest. Periodic directions wrap the
/// face adjacency (and later the global numbering).
struct HexMesh {
  int elem_count = 0;
  int ex = 0, ey = 0, ez = 0;           // per-direction counts (0 if loaded from dump)
  std::array<double, 3> origin{0, 0, 0};
  std::array<double, 3> lengths{1, 1, 1};
  std::array<bool, 3> periodic{false, false, false};

  /// 8 corners per element, vertex-local ordering (i,j,k) bits, x fastest:
  /// corner c = (i + 2j + 4k), coordinate = corners[e][c].
  std::vector<std::array<std::array<double, 3>, 8>> corners;

  /// Face neighbors, -x,+x,-y,+y,-z,+z; -1 where there is none. A periodic
  /// face whose neighbor would be the element itself is recorded as -1.
  std::vector<std::array<int, 6>> neighbors;

  bool structured() const { return ex > 0; }
  std::array<int, 3> elem_coords(int e) const {
    return {e % ex, (e / ex) % ey, e / (ex * ey)};
  }
  std::array<double, 3> centroid(int e) const;
};

HexMesh build_box_mesh(int ex, int ey, int ez, const std::array<double, 3>& origin,
                       const std::array<double, 3>& lengths,
                       const std::array<bool, 3>& periodic);

/// Text dump: one line per element, 24 numbers (8 corners x 3 coordinates).
/// Geometry only; periodic wrap information is not representable here.
void write_mesh_dump(const HexMesh& mesh, const std::string& path);

/// Rebuilds geometry and face adjacency (corner matching) from a dump.
HexMesh load_mesh_dump(const std::string& path);

/// Element-to-rank assignment.
struct Partition {
  int rank_count = 0;
  std::vector<int> rank_of;         // per element
  std::vector<int> elems_per_rank;  // per rank
};

/// Recursive coordinate bisection over element centroids: splits along the
/// longest centroid-bounding-box axis (ties resolved x, y, z), proportional
/// rank counts on each side.
Partition partition_rcb(const HexMesh& mesh, int ranks);

/// One rank id per line, element order.
Partition load_partition(const std::string& path, int elem_count);
void write_partition(const Partition& part, const std::string& path);

/// Global ids for the element-corner vertices (periodic wrap respected for
/// structured meshes). Used by the coarse space and by mesh unit tests.
std::vector<std::array<std::int64_t, 8>> vertex_global_ids(const HexMesh& mesh);

} // namespace sembox

#endif
