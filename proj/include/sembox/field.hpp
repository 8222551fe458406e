#ifndef SEMBOX_FIELD_HPP
#define SEMBOX_FIELD_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sembox/errors.hpp"

namespace sembox {

enum class GridTag { velocity, pressure };

/// Per-element nodal values: E x n^3 doubles, x-index fastest, elements
/// outermost. n = N+1 on the velocity (GLL) grid, N-1 on the pressure (GL)
/// grid.
struct Field {
  GridTag tag = GridTag::velocity;
  int elem_count = 0;
  int n1d = 0; // points per direction within an element
  std::vector<double> v;

  Field() = default;
  Field(GridTag tag, int elem_count, int n1d)
      : tag(tag), elem_count(elem_count), n1d(n1d),
        v(static_cast<std::size_t>(elem_count) * n1d * n1d * n1d, 0.0) {}

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int nper() const { return n1d * n1d * n1d; }

  std::int64_t idx(int e, int i, int j, int k) const {
    return ((static_cast<std::int64_t>(e) * n1d + k) * n1d + j) * n1d + i;
  }
  double& at(int e, int i, int j, int k) { return v[idx(e, i, j, k)]; }
  double at(int e, int i, int j, int k) const { return v[idx(e, i, j, k)]; }

  bool same_shape(const Field& o) const {
    return tag == o.tag && elem_count == o.elem_count && n1d == o.n1d;
  }
};

inline void require_shape(const Field& f, GridTag tag, int elem_count, int n1d,
                          const std::string& where) {
  if (f.tag != tag || f.elem_count != elem_count || f.n1d != n1d)
    throw ContractViolation(where + ": field grid/shape mismatch");
}

using VectorField = std::array<Field, 3>;

// Elementwise helpers. Accumulation order is fixed (ascending index within an
// element, ascending elements) so results are bitwise reproducible for any
// worker count.
void field_fill(Field& f, double value);
void field_axpy(double alpha, const Field& x, Field& y); // y += alpha*x
void field_scale(Field& f, double alpha);
void field_copy(const Field& src, Field& dst);
void field_pointwise_mul(const Field& a, Field& b); // b *= a

double field_dot(const Field& a, const Field& b);
/// Dot with 1/multiplicity weights so shared nodes count once.
double field_dot_weighted(const Field& a, const Field& b,
                          const std::vector<double>& inv_mult);
double field_norm2(const Field& a);
double field_max_abs(const Field& a);

} // namespace sembox

#endif
