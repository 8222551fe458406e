#include "sembox/xxt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "sembox/errors.hpp"

namespace sembox {

SparseSpd SparseSpd::from_triplets(
    int n, std::vector<std::pair<std::pair<int, int>, double>> t) {
  std::sort(t.begin(), t.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseSpd a;
  a.n = n;
  a.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i;
    double s = 0.0;
    while (j < t.size() && t[j].first == t[i].first) s += t[j++].second;
    if (s != 0.0) {
      a.col.push_back(t[i].first.second);
      a.val.push_back(s);
      ++a.row_ptr[t[i].first.first + 1];
    }
    i = j;
  }
  for (int r = 0; r < n; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
  return a;
}

void SparseSpd::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  if (static_cast<int>(x.size()) != n)
    throw ContractViolation("SparseSpd::multiply: dimension mismatch");
  y.assign(n, 0.0);
  for (int r = 0; r < n; ++r)
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      y[r] += val[k] * x[col[k]];
}

std::int64_t XXTFactor::nnz() const {
  std::int64_t s = 0;
  for (const auto& c : cols) s += static_cast<std::int64_t>(c.size());
  return s;
}

namespace {

using SparseVec = std::vector<std::pair<int, double>>; // sorted by index

double sparse_dot(const SparseVec& a, const SparseVec& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first)
      ++i;
    else if (a[i].first > b[j].first)
      ++j;
    else
      s += a[i++].second * b[j++].second;
  }
  return s;
}

// y -= c * x (sorted merge). Entries are kept even when tiny: sparsity comes
// from structure, never from dropping values.
void sparse_axpy(SparseVec& y, double c, const SparseVec& x) {
  if (c == 0.0) return;
  SparseVec out;
  out.reserve(y.size() + x.size());
  std::size_t i = 0, j = 0;
  while (i < y.size() || j < x.size()) {
    if (j == x.size() || (i < y.size() && y[i].first < x[j].first))
      out.push_back(y[i++]);
    else if (i == y.size() || x[j].first < y[i].first)
      out.push_back({x[j].first, -c * x[j].second}), ++j;
    else {
      out.push_back({y[i].first, y[i].second - c * x[j].second});
      ++i, ++j;
    }
  }
  y = std::move(out);
}

void bisect_order(const SparseSpd& a, std::vector<int> verts, std::vector<int>& out) {
  const std::size_t n = verts.size();
  if (n <= 24) {
    std::sort(verts.begin(), verts.end());
    out.insert(out.end(), verts.begin(), verts.end());
    return;
  }
  std::vector<char> in_set(a.n, 0);
  for (int v : verts) in_set[v] = 1;

  // BFS level structure from a pseudo-peripheral vertex.
  auto bfs = [&](int start, std::vector<int>& level) {
    level.assign(a.n, -1);
    std::queue<int> q;
    int last = start;
    // multi-source restart to cover disconnected pieces deterministically
    std::vector<int> sorted = verts;
    std::sort(sorted.begin(), sorted.end());
    level[start] = 0;
    q.push(start);
    std::size_t covered = 1, cursor = 0;
    int base_level = 0;
    for (;;) {
      while (!q.empty()) {
        const int v = q.front();
        q.pop();
        last = v;
        base_level = level[v];
        for (std::int64_t k = a.row_ptr[v]; k < a.row_ptr[v + 1]; ++k) {
          const int w = a.col[k];
          if (w != v && in_set[w] && level[w] < 0) {
            level[w] = level[v] + 1;
            q.push(w);
            ++covered;
          }
        }
      }
      if (covered == n) break;
      while (level[sorted[cursor]] >= 0) ++cursor;
      level[sorted[cursor]] = base_level + 1;
      q.push(sorted[cursor]);
      ++covered;
    }
    return last;
  };

  std::vector<int> level;
  const int far = bfs(*std::min_element(verts.begin(), verts.end()), level);
  bfs(far, level);

  std::vector<int> sorted = verts;
  std::sort(sorted.begin(), sorted.end(), [&](int x, int y) {
    if (level[x] != level[y]) return level[x] < level[y];
    return x < y;
  });
  const std::size_t half = (n + 1) / 2;
  std::vector<char> in_b(a.n, 0);
  for (std::size_t i = half; i < n; ++i) in_b[sorted[i]] = 1;

  std::vector<int> part_a, sep, part_b(sorted.begin() + half, sorted.end());
  for (std::size_t i = 0; i < half; ++i) {
    const int v = sorted[i];
    bool boundary = false;
    for (std::int64_t k = a.row_ptr[v]; k < a.row_ptr[v + 1] && !boundary; ++k)
      boundary = in_b[a.col[k]] != 0;
    (boundary ? sep : part_a).push_back(v);
  }
  if (part_a.empty() || part_b.empty()) { // no usable split, stop recursing
    std::sort(verts.begin(), verts.end());
    out.insert(out.end(), verts.begin(), verts.end());
    return;
  }
  bisect_order(a, std::move(part_a), out);
  bisect_order(a, std::move(part_b), out);
  std::sort(sep.begin(), sep.end());
  out.insert(out.end(), sep.begin(), sep.end());
}

} // namespace

std::vector<int> nested_dissection_order(const SparseSpd& a) {
  std::vector<int> verts(a.n);
  for (int i = 0; i < a.n; ++i) verts[i] = i;
  std::vector<int> out;
  out.reserve(a.n);
  bisect_order(a, std::move(verts), out);
  return out;
}

XXTFactor xxt_factor(const SparseSpd& a0) {
  if (a0.n > 10000)
    throw ConfigError("xxt_factor: dimension " + std::to_string(a0.n) +
                      " exceeds the desk-scale limit of 10000");
  XXTFactor f;
  f.n = a0.n;
  f.order = nested_dissection_order(a0);
  f.cols.reserve(a0.n);

  std::vector<SparseVec> ycols; // A * columns of X
  ycols.reserve(a0.n);

  for (int jj = 0; jj < a0.n; ++jj) {
    const int p = f.order[jj];
    SparseVec v{{p, 1.0}};
    SparseVec w; // A e_p = row p of A (symmetric)
    for (std::int64_t k = a0.row_ptr[p]; k < a0.row_ptr[p + 1]; ++k)
      w.push_back({a0.col[k], a0.val[k]});
    std::sort(w.begin(), w.end());

    // modified Gram-Schmidt in the A inner product, x and Ax updated together
    for (int i = 0; i < jj; ++i) {
      const double c = sparse_dot(f.cols[i], w);
      if (c != 0.0) {
        sparse_axpy(v, c, f.cols[i]);
        sparse_axpy(w, c, ycols[i]);
      }
    }
    const double d = sparse_dot(v, w);
    if (!(d > 0.0))
      throw FactorizationError("xxt_factor: nonpositive pivot " + std::to_string(d) +
                                   " at column " + std::to_string(p),
                               p);
    const double inv = 1.0 / std::sqrt(d);
    for (auto& e : v) e.second *= inv;
    for (auto& e : w) e.second *= inv;
    f.cols.push_back(std::move(v));
    ycols.push_back(std::move(w));
  }
  return f;
}

std::vector<double> xxt_solve(const XXTFactor& f, const std::vector<double>& b) {
  if (static_cast<int>(b.size()) != f.n)
    throw ContractViolation("xxt_solve: dimension mismatch");
  std::vector<double> u(f.cols.size(), 0.0), x(f.n, 0.0);
  for (std::size_t j = 0; j < f.cols.size(); ++j) {
    double s = 0.0;
    for (const auto& [r, val] : f.cols[j]) s += val * b[r];
    u[j] = s;
  }
  for (std::size_t j = 0; j < f.cols.size(); ++j)
    for (const auto& [r, val] : f.cols[j]) x[r] += val * u[j];
  return x;
}

} // namespace sembox
