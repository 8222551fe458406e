#include "sembox/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "sembox/errors.hpp"

namespace sembox {

std::array<double, 3> HexMesh::centroid(int e) const {
  std::array<double, 3> c{0, 0, 0};
  for (const auto& p : corners[e])
    for (int d = 0; d < 3; ++d) c[d] += p[d] / 8.0;
  return c;
}

HexMesh build_box_mesh(int ex, int ey, int ez, const std::array<double, 3>& origin,
                       const std::array<double, 3>& lengths,
                       const std::array<bool, 3>& periodic) {
  if (ex < 1 || ey < 1 || ez < 1)
    throw ConfigError("build_box_mesh: element counts must be >= 1");
  for (int d = 0; d < 3; ++d)
    if (!(lengths[d] > 0.0))
      throw ConfigError("build_box_mesh: domain extents must be positive");

  HexMesh mesh;
  mesh.ex = ex;
  mesh.ey = ey;
  mesh.ez = ez;
  mesh.elem_count = ex * ey * ez;
  mesh.origin = origin;
  mesh.lengths = lengths;
  mesh.periodic = periodic;
  mesh.corners.resize(mesh.elem_count);
  mesh.neighbors.resize(mesh.elem_count);

  const std::array<int, 3> counts{ex, ey, ez};
  const std::array<double, 3> h{lengths[0] / ex, lengths[1] / ey, lengths[2] / ez};

  for (int kz = 0; kz < ez; ++kz)
    for (int jy = 0; jy < ey; ++jy)
      for (int ix = 0; ix < ex; ++ix) {
        const int e = ix + ex * (jy + ey * kz);
        const std::array<int, 3> cell{ix, jy, kz};
        for (int c = 0; c < 8; ++c) {
          for (int d = 0; d < 3; ++d) {
            const int bit = (c >> d) & 1;
            mesh.corners[e][c][d] = origin[d] + h[d] * (cell[d] + bit);
          }
        }
        for (int d = 0; d < 3; ++d) {
          for (int side = 0; side < 2; ++side) {
            int nb = cell[d] + (side == 0 ? -1 : 1);
            if (nb < 0 || nb >= counts[d]) {
              if (periodic[d] && counts[d] > 1)
                nb = (nb + counts[d]) % counts[d];
              else
                nb = -1;
            }
            int ne = -1;
            if (nb >= 0) {
              std::array<int, 3> nc = cell;
              nc[d] = nb;
              ne = nc[0] + ex * (nc[1] + ey * nc[2]);
            }
            mesh.neighbors[e][2 * d + side] = ne;
          }
        }
      }
  return mesh;
}

void write_mesh_dump(const HexMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_mesh_dump: cannot open " + path);
  out.precision(17);
  for (int e = 0; e < mesh.elem_count; ++e) {
    for (int c = 0; c < 8; ++c)
      for (int d = 0; d < 3; ++d)
        out << mesh.corners[e][c][d] << (c == 7 && d == 2 ? "" : " ");
    out << "\n";
  }
}

namespace {

// Quantized coordinate key for exact matching of dumped geometry.
std::array<std::int64_t, 3> quantize(const std::array<double, 3>& p, double scale) {
  std::array<std::int64_t, 3> q;
  for (int d = 0; d < 3; ++d)
    q[d] = static_cast<std::int64_t>(std::llround(p[d] / scale));
  return q;
}

// Corner indices of face f (d = f/2, side = f%2) in the (i + 2j + 4k) order.
std::array<int, 4> face_corners(int f) {
  const int d = f / 2, side = f % 2;
  std::array<int, 4> out;
  int c = 0;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        const std::array<int, 3> bits{i, j, k};
        if (bits[d] == side) out[c++] = bits[0] + 2 * bits[1] + 4 * bits[2];
      }
  return out;
}

} // namespace

HexMesh load_mesh_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("load_mesh_dump: cannot open " + path);
  HexMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream is(line);
    std::array<std::array<double, 3>, 8> corners;
    for (int c = 0; c < 8; ++c)
      for (int d = 0; d < 3; ++d)
        if (!(is >> corners[c][d]))
          throw MeshError("load_mesh_dump: " + path + ":" + std::to_string(lineno) +
                          ": expected 24 numbers");
    mesh.corners.push_back(corners);
  }
  mesh.elem_count = static_cast<int>(mesh.corners.size());
  if (mesh.elem_count == 0) throw MeshError("load_mesh_dump: empty file " + path);

  // Geometric face adjacency: faces match when their 4-corner key sets match.
  double diam = 0.0;
  for (const auto& cs : mesh.corners)
    for (const auto& p : cs)
      for (int d = 0; d < 3; ++d) diam = std::max(diam, std::abs(p[d]));
  const double scale = std::max(diam, 1.0) * 1e-12;

  std::map<std::array<std::array<std::int64_t, 3>, 4>, std::vector<std::pair<int, int>>>
      face_map;
  mesh.neighbors.assign(mesh.elem_count, {-1, -1, -1, -1, -1, -1});
  for (int e = 0; e < mesh.elem_count; ++e) {
    for (int f = 0; f < 6; ++f) {
      std::array<std::array<std::int64_t, 3>, 4> key;
      const auto fc = face_corners(f);
      for (int c = 0; c < 4; ++c) key[c] = quantize(mesh.corners[e][fc[c]], scale);
      std::sort(key.begin(), key.end());
      face_map[key].push_back({e, f});
    }
  }
  for (const auto& [key, owners] : face_map) {
    if (owners.size() == 2) {
      mesh.neighbors[owners[0].first][owners[0].second] = owners[1].first;
      mesh.neighbors[owners[1].first][owners[1].second] = owners[0].first;
    } else if (owners.size() > 2) {
      throw MeshError("load_mesh_dump: face shared by more than two elements");
    }
  }
  return mesh;
}

namespace {

void rcb_recurse(const HexMesh& mesh, std::vector<int>& elems, int ranks,
                 int first_rank, Partition& part) {
  if (ranks == 1) {
    for (int e : elems) part.rank_of[e] = first_rank;
    return;
  }
  // Longest axis of the centroid bounding box, ties x before y before z.
  std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  std::vector<std::array<double, 3>> cents(elems.size());
  for (std::size_t i = 0; i < elems.size(); ++i) {
    cents[i] = mesh.centroid(elems[i]);
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], cents[i][d]);
      hi[d] = std::max(hi[d], cents[i][d]);
    }
  }
  int axis = 0;
  for (int d = 1; d < 3; ++d)
    if (hi[d] - lo[d] > hi[axis] - lo[axis] + 1e-12 * (hi[axis] - lo[axis] + 1.0))
      axis = d;

  std::vector<std::size_t> order(elems.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cents[a][axis] != cents[b][axis]) return cents[a][axis] < cents[b][axis];
    return elems[a] < elems[b];
  });

  const int r1 = (ranks + 1) / 2, r2 = ranks - r1;
  const std::int64_t n = static_cast<std::int64_t>(elems.size());
  std::int64_t n1 = (n * r1 + ranks / 2) / ranks;
  n1 = std::clamp<std::int64_t>(n1, r1, n - r2); // each side keeps >= 1 elem/rank

  std::vector<int> left, right;
  left.reserve(n1);
  right.reserve(n - n1);
  for (std::int64_t i = 0; i < n; ++i)
    (i < n1 ? left : right).push_back(elems[order[i]]);
  rcb_recurse(mesh, left, r1, first_rank, part);
  rcb_recurse(mesh, right, r2, first_rank + r1, part);
}

} // namespace

Partition partition_rcb(const HexMesh& mesh, int ranks) {
  if (ranks < 1) throw ConfigError("partition_rcb: ranks must be >= 1");
  if (ranks > mesh.elem_count)
    throw ConfigError("partition_rcb: ranks (" + std::to_string(ranks) +
                      ") exceed element count (" + std::to_string(mesh.elem_count) + ")");
  Partition part;
  part.rank_count = ranks;
  part.rank_of.assign(mesh.elem_count, -1);
  std::vector<int> all(mesh.elem_count);
  std::iota(all.begin(), all.end(), 0);
  rcb_recurse(mesh, all, ranks, 0, part);
  part.elems_per_rank.assign(ranks, 0);
  for (int r : part.rank_of) ++part.elems_per_rank[r];
  return part;
}

Partition load_partition(const std::string& path, int elem_count) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_partition: cannot open " + path);
  Partition part;
  part.rank_of.reserve(elem_count);
  int r;
  while (in >> r) part.rank_of.push_back(r);
  if (static_cast<int>(part.rank_of.size()) != elem_count)
    throw ConfigError("load_partition: " + path + " has " +
                      std::to_string(part.rank_of.size()) + " entries, expected " +
                      std::to_string(elem_count));
  part.rank_count = *std::max_element(part.rank_of.begin(), part.rank_of.end()) + 1;
  part.elems_per_rank.assign(part.rank_count, 0);
  for (int rr : part.rank_of) {
    if (rr < 0) throw ConfigError("load_partition: negative rank id");
    ++part.elems_per_rank[rr];
  }
  return part;
}

void write_partition(const Partition& part, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_partition: cannot open " + path);
  for (int r : part.rank_of) out << r << "\n";
}

std::vector<std::array<std::int64_t, 8>> vertex_global_ids(const HexMesh& mesh) {
  std::vector<std::array<std::int64_t, 8>> ids(mesh.elem_count);
  if (mesh.structured()) {
    const std::array<int, 3> counts{mesh.ex, mesh.ey, mesh.ez};
    std::array<std::int64_t, 3> vdim;
    for (int d = 0; d < 3; ++d)
      vdim[d] = (mesh.periodic[d] && counts[d] > 1) ? counts[d] : counts[d] + 1;
    for (int e = 0; e < mesh.elem_count; ++e) {
      const auto cell = mesh.elem_coords(e);
      for (int c = 0; c < 8; ++c) {
        std::array<std::int64_t, 3> g;
        for (int d = 0; d < 3; ++d) {
          g[d] = cell[d] + ((c >> d) & 1);
          if (mesh.periodic[d] && counts[d] > 1) g[d] %= counts[d];
        }
        ids[e][c] = g[0] + vdim[0] * (g[1] + vdim[1] * g[2]);
      }
    }
    return ids;
  }
  // Dump-loaded meshes: quantized coordinate matching.
  double diam = 0.0;
  for (const auto& cs : mesh.corners)
    for (const auto& p : cs)
      for (int d = 0; d < 3; ++d) diam = std::max(diam, std::abs(p[d]));
  const double scale = std::max(diam, 1.0) * 1e-12;
  std::map<std::array<std::int64_t, 3>, std::int64_t> seen;
  for (int e = 0; e < mesh.elem_count; ++e)
    for (int c = 0; c < 8; ++c) {
      const auto key = quantize(mesh.corners[e][c], scale);
      auto [it, inserted] = seen.insert({key, static_cast<std::int64_t>(seen.size())});
      ids[e][c] = it->second;
    }
  return ids;
}

} // namespace sembox
