#include "sembox/field.hpp"

#include <cmath>

#include "sembox/parallel.hpp"

namespace sembox {

namespace {

// Per-element partial sums combined in ascending element order: bitwise
// independent of the worker count.
template <typename PerElement>
double deterministic_reduce(int elem_count, int nper, PerElement per_element) {
  std::vector<double> partial(elem_count, 0.0);
  parallel_for(elem_count, [&](std::int64_t e) {
    partial[e] = per_element(static_cast<std::int64_t>(e) * nper);
  });
  double s = 0.0;
  for (int e = 0; e < elem_count; ++e) s += partial[e];
  return s;
}

} // namespace

void field_fill(Field& f, double value) {
  parallel_for_ranges(f.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) f.v[i] = value;
  });
}

void field_axpy(double alpha, const Field& x, Field& y) {
  if (!x.same_shape(y)) throw ContractViolation("field_axpy: shape mismatch");
  parallel_for_ranges(x.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) y.v[i] += alpha * x.v[i];
  });
}

void field_scale(Field& f, double alpha) {
  parallel_for_ranges(f.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) f.v[i] *= alpha;
  });
}

void field_copy(const Field& src, Field& dst) {
  dst.tag = src.tag;
  dst.elem_count = src.elem_count;
  dst.n1d = src.n1d;
  dst.v = src.v;
}

void field_pointwise_mul(const Field& a, Field& b) {
  if (!a.same_shape(b)) throw ContractViolation("field_pointwise_mul: shape mismatch");
  parallel_for_ranges(a.size(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) b.v[i] *= a.v[i];
  });
}

double field_dot(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw ContractViolation("field_dot: shape mismatch");
  const int nper = a.nper();
  return deterministic_reduce(a.elem_count, nper, [&](std::int64_t base) {
    double s = 0.0;
    for (int i = 0; i < nper; ++i) s += a.v[base + i] * b.v[base + i];
    return s;
  });
}

double field_dot_weighted(const Field& a, const Field& b,
                          const std::vector<double>& inv_mult) {
  if (!a.same_shape(b)) throw ContractViolation("field_dot_weighted: shape mismatch");
  if (static_cast<std::int64_t>(inv_mult.size()) != a.size())
    throw ContractViolation("field_dot_weighted: weight size mismatch");
  const int nper = a.nper();
  return deterministic_reduce(a.elem_count, nper, [&](std::int64_t base) {
    double s = 0.0;
    for (int i = 0; i < nper; ++i)
      s += a.v[base + i] * b.v[base + i] * inv_mult[base + i];
    return s;
  });
}

double field_norm2(const Field& a) { return std::sqrt(field_dot(a, a)); }

double field_max_abs(const Field& a) {
  const int nper = a.nper();
  std::vector<double> partial(a.elem_count, 0.0);
  parallel_for(a.elem_count, [&](std::int64_t e) {
    double m = 0.0;
    const std::int64_t base = e * nper;
    for (int i = 0; i < nper; ++i) m = std::max(m, std::abs(a.v[base + i]));
    partial[e] = m;
  });
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

} // namespace sembox
