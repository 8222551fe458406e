#ifndef SEMBOX_XXT_HPP
#define SEMBOX_XXT_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace sembox {

/// Minimal CSR for symmetric positive definite matrices.
struct SparseSpd {
  int n = 0;
  std::vector<std::int64_t> row_ptr; // n+1
  std::vector<int> col;
  std::vector<double> val;

  static SparseSpd from_triplets(int n,
                                 std::vector<std::pair<std::pair<int, int>, double>> t);
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

/// Sparse factor X with X X^T = A^-1, built by A-orthogonalization of unit
/// vectors under a nested-dissection-style column ordering. The ordering
/// only shapes the sparsity; exactness holds for any ordering.
struct XXTFactor {
  int n = 0;
  std::vector<int> order; // processing order of the unit vectors
  std::vector<std::vector<std::pair<int, double>>> cols; // sparse columns of X

  std::int64_t nnz() const;
};

/// Recursive graph-bisection ordering of the CSR adjacency (separators last).
std::vector<int> nested_dissection_order(const SparseSpd& a);

XXTFactor xxt_factor(const SparseSpd& a0);

/// x = X (X^T b): two sparse products, no triangular substitution.
std::vector<double> xxt_solve(const XXTFactor& f, const std::vector<double>& b);

} // namespace sembox

#endif
