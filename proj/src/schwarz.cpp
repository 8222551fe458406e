#include "sembox/schwarz.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <map>
#include <set>

#include "sembox/parallel.hpp"

namespace sembox {

namespace {

struct Subdomain {
  std::vector<std::int64_t> dofs;  // global ids (unknowns), ascending
  std::vector<double> sqrt_weight; // aligned with dofs
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> solver;
};

} // namespace

struct SchwarzPreconditioner::Impl {
  const GatherScatterMap* map = nullptr;
  const PressureBasis* pbasis = nullptr; // set lazily by the pressure wrap
  int n1d = 0;
  std::int64_t n_true = 0;
  std::vector<std::int64_t> representative; // one local node per gid
  std::vector<int> membership_count;        // subdomains containing each gid

  std::vector<Subdomain> subdomains;

  bool use_coarse = false;
  std::vector<std::vector<std::pair<std::int64_t, double>>> coarse_cols; // gid, hat value
  XXTFactor coarse_factor;
};

int SchwarzPreconditioner::subdomain_count() const {
  return impl_ ? static_cast<int>(impl_->subdomains.size()) : 0;
}

std::vector<double> SchwarzPreconditioner::overlap_weight_sums() const {
  if (!impl_) return {};
  std::vector<double> sums(impl_->n_true, 0.0);
  for (std::int64_t g = 0; g < impl_->n_true; ++g)
    if (impl_->membership_count[g] > 0)
      sums[g] = impl_->membership_count[g] * (1.0 / impl_->membership_count[g]);
  return sums;
}

std::int64_t SchwarzPreconditioner::coarse_factor_nnz() const {
  return impl_ && impl_->use_coarse ? impl_->coarse_factor.nnz() : 0;
}

namespace {

using ElemTriplets = std::vector<std::vector<std::pair<std::pair<int, int>, double>>>;

ElemTriplets element_triplets(const HexMesh& mesh, const SpectralBasis& basis,
                              const GeometricFactors& gf, const HelmholtzCoeffs& coeffs) {
  const int n = basis.n();
  const int nn = n * n * n;
  ElemTriplets trip(mesh.elem_count);
  parallel_for(mesh.elem_count, [&](std::int64_t e) {
    const std::vector<double> dense = element_matrix(static_cast<int>(e), coeffs, gf, basis);
    auto& t = trip[e];
    for (int r = 0; r < nn; ++r)
      for (int c = 0; c < nn; ++c) {
        const double v = dense[static_cast<std::size_t>(r) * nn + c];
        if (v != 0.0) t.push_back({{r, c}, v});
      }
  });
  return trip;
}

VertexCoarseSpace coarse_from_triplets(const HexMesh& mesh, const SpectralBasis& basis,
                                       const GatherScatterMap& map, const Field* mask,
                                       const ElemTriplets& elem_trip, bool pin_constant) {
  const int n = basis.n();
  const int nn = n * n * n;
  const auto vids = vertex_global_ids(mesh);
  std::vector<std::int64_t> representative(map.global_count);
  for (std::int64_t g = 0; g < map.global_count; ++g)
    representative[g] = map.group_nodes[map.group_offsets[g]];
  auto masked = [&](std::int64_t gid) {
    return mask != nullptr && mask->v[representative[gid]] == 0.0;
  };

  // vertex id -> gather gid via the corner nodes
  std::map<std::int64_t, std::int64_t> vertex_gid;
  for (int e = 0; e < mesh.elem_count; ++e) {
    const std::int64_t base = static_cast<std::int64_t>(e) * nn;
    for (int c = 0; c < 8; ++c) {
      const int i = (c & 1) * (n - 1), j = ((c >> 1) & 1) * (n - 1),
                k = ((c >> 2) & 1) * (n - 1);
      vertex_gid[vids[e][c]] = map.gid[base + (k * n + j) * n + i];
    }
  }
  std::vector<std::int64_t> coarse_dofs;
  std::map<std::int64_t, int> coarse_of;
  for (const auto& [v, g] : vertex_gid) {
    if (masked(g)) continue;
    coarse_dofs.push_back(v);
  }
  if (pin_constant && !coarse_dofs.empty()) coarse_dofs.erase(coarse_dofs.begin());
  for (std::size_t i = 0; i < coarse_dofs.size(); ++i)
    coarse_of[coarse_dofs[i]] = static_cast<int>(i);
  const int nc = static_cast<int>(coarse_dofs.size());
  if (nc == 0) return VertexCoarseSpace{}; // all vertices masked: no coarse level

  std::vector<double> hat1d_lo(n), hat1d_hi(n);
  for (int i = 0; i < n; ++i) {
    hat1d_lo[i] = 0.5 * (1.0 - basis.nodes[i]);
    hat1d_hi[i] = 0.5 * (1.0 + basis.nodes[i]);
  }
  auto hat = [&](int corner, int i, int j, int k) {
    const double hx = (corner & 1) ? hat1d_hi[i] : hat1d_lo[i];
    const double hy = ((corner >> 1) & 1) ? hat1d_hi[j] : hat1d_lo[j];
    const double hz = ((corner >> 2) & 1) ? hat1d_hi[k] : hat1d_lo[k];
    return hx * hy * hz;
  };

  VertexCoarseSpace cs;
  std::vector<std::map<std::int64_t, double>> cols(nc);
  for (int e = 0; e < mesh.elem_count; ++e) {
    const std::int64_t base = static_cast<std::int64_t>(e) * nn;
    for (int c = 0; c < 8; ++c) {
      const auto it = coarse_of.find(vids[e][c]);
      if (it == coarse_of.end()) continue;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const std::int64_t g = map.gid[base + (k * n + j) * n + i];
            if (masked(g)) continue;
            const double h = hat(c, i, j, k);
            if (h != 0.0) cols[it->second][g] = h;
          }
    }
  }
  cs.columns.resize(nc);
  for (int c = 0; c < nc; ++c) cs.columns[c].assign(cols[c].begin(), cols[c].end());

  std::vector<std::pair<std::pair<int, int>, double>> a0trip;
  for (int e = 0; e < mesh.elem_count; ++e) {
    const std::int64_t base = static_cast<std::int64_t>(e) * nn;
    std::array<int, 8> cidx;
    for (int c = 0; c < 8; ++c) {
      const auto it = coarse_of.find(vids[e][c]);
      cidx[c] = it == coarse_of.end() ? -1 : it->second;
    }
    std::vector<double> phi(static_cast<std::size_t>(nn) * 8, 0.0);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int a = (k * n + j) * n + i;
          if (mask != nullptr && mask->v[base + a] == 0.0) continue;
          for (int c = 0; c < 8; ++c)
            phi[static_cast<std::size_t>(a) * 8 + c] = hat(c, i, j, k);
        }
    std::vector<double> t(static_cast<std::size_t>(nn) * 8, 0.0);
    for (const auto& [rc, v] : elem_trip[e])
      for (int c = 0; c < 8; ++c)
        t[static_cast<std::size_t>(rc.first) * 8 + c] +=
            v * phi[static_cast<std::size_t>(rc.second) * 8 + c];
    for (int cw = 0; cw < 8; ++cw) {
      if (cidx[cw] < 0) continue;
      for (int cv = 0; cv < 8; ++cv) {
        if (cidx[cv] < 0) continue;
        double sum = 0.0;
        for (int a = 0; a < nn; ++a)
          sum += phi[static_cast<std::size_t>(a) * 8 + cw] *
                 t[static_cast<std::size_t>(a) * 8 + cv];
        if (sum != 0.0) a0trip.push_back({{cidx[cw], cidx[cv]}, sum});
      }
    }
  }
  cs.a0 = SparseSpd::from_triplets(nc, std::move(a0trip));
  return cs;
}

} // namespace

VertexCoarseSpace build_vertex_coarse_space(const HexMesh& mesh,
                                            const SpectralBasis& basis,
                                            const GeometricFactors& gf,
                                            const GatherScatterMap& map,
                                            const Field* mask,
                                            const HelmholtzCoeffs& coeffs,
                                            bool pin_constant) {
  return coarse_from_triplets(mesh, basis, map, mask,
                              element_triplets(mesh, basis, gf, coeffs), pin_constant);
}

SchwarzPreconditioner build_schwarz(const HexMesh& mesh, const SpectralBasis& basis,
                                    const GeometricFactors& gf,
                                    const GatherScatterMap& map, const Field* mask,
                                    const Partition& partition,
                                    const HelmholtzCoeffs& coeffs,
                                    const SchwarzOptions& options) {
  const int n = basis.n();
  const int nn = n * n * n;
  if (partition.rank_count < 1 || static_cast<int>(partition.rank_of.size()) != mesh.elem_count)
    throw ContractViolation("build_schwarz: partition does not match mesh");

  auto impl = std::make_shared<SchwarzPreconditioner::Impl>();
  impl->map = &map;
  impl->n1d = n;
  impl->n_true = map.global_count;
  impl->representative.resize(map.global_count);
  for (std::int64_t g = 0; g < map.global_count; ++g)
    impl->representative[g] = map.group_nodes[map.group_offsets[g]];

  auto masked = [&](std::int64_t gid) {
    return mask != nullptr && mask->v[impl->representative[gid]] == 0.0;
  };

  // Subdomain element sets: owned elements plus face neighbors.
  std::vector<std::vector<int>> sub_elems(partition.rank_count);
  {
    std::vector<std::set<int>> sets(partition.rank_count);
    for (int e = 0; e < mesh.elem_count; ++e) {
      const int r = partition.rank_of[e];
      sets[r].insert(e);
      for (int f = 0; f < 6; ++f)
        if (mesh.neighbors[e][f] >= 0) sets[r].insert(mesh.neighbors[e][f]);
    }
    for (int r = 0; r < partition.rank_count; ++r)
      sub_elems[r].assign(sets[r].begin(), sets[r].end());
  }

  // Sparse element matrices (structural zeros dropped), each element once.
  const ElemTriplets elem_trip = element_triplets(mesh, basis, gf, coeffs);

  // Globally assembled operator on the unmasked true dofs. Local problems
  // take principal submatrices of it: dofs outside a subdomain's index set
  // are held at zero (homogeneous Dirichlet on the overlap boundary).
  Eigen::SparseMatrix<double> assembled(static_cast<int>(map.global_count),
                                        static_cast<int>(map.global_count));
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < mesh.elem_count; ++e) {
      const std::int64_t base = static_cast<std::int64_t>(e) * nn;
      for (const auto& [rc, v] : elem_trip[e]) {
        const std::int64_t ga = map.gid[base + rc.first];
        const std::int64_t gb = map.gid[base + rc.second];
        if (masked(ga) || masked(gb)) continue;
        trip.emplace_back(static_cast<int>(ga), static_cast<int>(gb), v);
      }
    }
    assembled.setFromTriplets(trip.begin(), trip.end());
  }

  // Subdomain index sets: every unmasked dof of the subdomain's elements, so
  // each dof of a rank's own elements is covered by that rank's solve.
  impl->membership_count.assign(map.global_count, 0);
  std::vector<std::vector<std::int64_t>> sub_dofs(partition.rank_count);
  for (int r = 0; r < partition.rank_count; ++r) {
    std::set<std::int64_t> gids;
    for (int e : sub_elems[r]) {
      const std::int64_t base = static_cast<std::int64_t>(e) * nn;
      for (int a = 0; a < nn; ++a) {
        const std::int64_t g = map.gid[base + a];
        if (!masked(g)) gids.insert(g);
      }
    }
    sub_dofs[r].assign(gids.begin(), gids.end());
    for (std::int64_t g : sub_dofs[r]) ++impl->membership_count[g];
  }

  std::int64_t total_unmasked = 0;
  for (std::int64_t g = 0; g < map.global_count; ++g)
    if (!masked(g)) ++total_unmasked;

  impl->subdomains.resize(partition.rank_count);
  std::vector<std::string> failures(partition.rank_count);
  parallel_for(partition.rank_count, [&](std::int64_t r) {
    auto& sd = impl->subdomains[r];
    sd.dofs = sub_dofs[r];

    // A subdomain covering the whole unmasked domain inherits the constant
    // null space of a pure-stiffness operator; pin its first dof.
    if (options.has_nullspace &&
        static_cast<std::int64_t>(sd.dofs.size()) == total_unmasked && !sd.dofs.empty()) {
      sd.dofs.erase(sd.dofs.begin());
    }
    if (sd.dofs.empty()) return;

    std::vector<int> local_of(map.global_count, -1);
    for (std::size_t i = 0; i < sd.dofs.size(); ++i)
      local_of[sd.dofs[i]] = static_cast<int>(i);

    std::vector<Eigen::Triplet<double>> trip;
    for (std::int64_t g : sd.dofs) {
      const int row = local_of[g];
      for (Eigen::SparseMatrix<double>::InnerIterator it(assembled,
                                                          static_cast<int>(g));
           it; ++it) {
        const int col = local_of[it.row()];
        if (col >= 0) trip.emplace_back(col, row, it.value());
      }
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(sd.dofs.size()),
                                  static_cast<int>(sd.dofs.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    sd.solver = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    sd.solver->compute(a);
    if (sd.solver->info() != Eigen::Success) {
      failures[r] = "build_schwarz: singular local block in subdomain " +
                    std::to_string(r) + " (missing Dirichlet/zero-mean handling)";
      return;
    }
    sd.sqrt_weight.resize(sd.dofs.size());
    for (std::size_t i = 0; i < sd.dofs.size(); ++i)
      sd.sqrt_weight[i] = std::sqrt(1.0 / impl->membership_count[sd.dofs[i]]);
  });
  for (const auto& f : failures)
    if (!f.empty()) throw ConfigError(f);

  // Vertex coarse space with trilinear embedding (skipped when every vertex
  // is masked, e.g. a single Dirichlet element).
  if (options.use_coarse) {
    VertexCoarseSpace cs = coarse_from_triplets(mesh, basis, map, mask, elem_trip,
                                                options.has_nullspace);
    if (cs.a0.n > 0) {
      impl->use_coarse = true;
      impl->coarse_cols = std::move(cs.columns);
      impl->coarse_factor = xxt_factor(cs.a0);
    }
  }

  SchwarzPreconditioner pre;
  pre.impl_ = std::move(impl);
  return pre;
}

namespace {

// Core additive apply on true-dof vectors.
void apply_core(const SchwarzPreconditioner::Impl& im, const std::vector<double>& r,
                std::vector<double>& z) {
  z.assign(im.n_true, 0.0);
  const int nsub = static_cast<int>(im.subdomains.size());
  std::vector<std::vector<double>> local(nsub);
  parallel_for(nsub, [&](std::int64_t k) {
    const auto& sd = im.subdomains[k];
    if (sd.dofs.empty()) return;
    Eigen::VectorXd rk(static_cast<int>(sd.dofs.size()));
    for (std::size_t i = 0; i < sd.dofs.size(); ++i)
      rk[static_cast<int>(i)] = sd.sqrt_weight[i] * r[sd.dofs[i]];
    const Eigen::VectorXd zk = sd.solver->solve(rk);
    local[k].resize(sd.dofs.size());
    for (std::size_t i = 0; i < sd.dofs.size(); ++i)
      local[k][i] = sd.sqrt_weight[i] * zk[static_cast<int>(i)];
  });
  for (int k = 0; k < nsub; ++k) { // fixed order, deterministic sums
    const auto& sd = im.subdomains[k];
    for (std::size_t i = 0; i < sd.dofs.size(); ++i) z[sd.dofs[i]] += local[k][i];
  }
  if (im.use_coarse) {
    const int nc = static_cast<int>(im.coarse_cols.size());
    std::vector<double> rc(nc, 0.0);
    for (int c = 0; c < nc; ++c)
      for (const auto& [g, h] : im.coarse_cols[c]) rc[c] += h * r[g];
    const std::vector<double> yc = xxt_solve(im.coarse_factor, rc);
    for (int c = 0; c < nc; ++c)
      for (const auto& [g, h] : im.coarse_cols[c]) z[g] += h * yc[c];
  }
}

} // namespace

Field apply_schwarz(const SchwarzPreconditioner& pre, const Field& r) {
  if (!pre.built()) throw ContractViolation("apply_schwarz: preconditioner not built");
  const auto& im = *pre.impl_;
  require_shape(r, GridTag::velocity, im.map->elem_count, im.n1d, "apply_schwarz");

  std::vector<double> rt(im.n_true), zt;
  for (std::int64_t g = 0; g < im.n_true; ++g) rt[g] = r.v[im.representative[g]];
  apply_core(im, rt, zt);

  Field z(GridTag::velocity, im.map->elem_count, im.n1d);
  parallel_for_ranges(z.size(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t a = lo; a < hi; ++a) z.v[a] = zt[im.map->gid[a]];
  });
  return z;
}

Field apply_schwarz_pressure(const SchwarzPreconditioner& pre, const Field& r,
                             const PressureBasis& pbasis) {
  if (!pre.built()) throw ContractViolation("apply_schwarz_pressure: not built");
  const auto& im = *pre.impl_;
  if (r.tag != GridTag::pressure)
    throw ContractViolation("apply_schwarz_pressure: expected a pressure-grid field");

  const Field v = interp_to_pressure_transpose(r, pbasis);
  std::vector<double> rt(im.n_true, 0.0), zt;
  // gather-sum of copies (transpose of the spread)
  for (std::int64_t g = 0; g < im.n_true; ++g) {
    double s = 0.0;
    for (std::int64_t c = im.map->group_offsets[g]; c < im.map->group_offsets[g + 1]; ++c)
      s += v.v[im.map->group_nodes[c]];
    rt[g] = s;
  }
  apply_core(im, rt, zt);
  Field zv(GridTag::velocity, im.map->elem_count, im.n1d);
  parallel_for_ranges(zv.size(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t a = lo; a < hi; ++a) zv.v[a] = zt[im.map->gid[a]];
  });
  return interp_to_pressure(zv, pbasis);
}

} // namespace sembox
