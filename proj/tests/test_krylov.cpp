#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "sembox/krylov.hpp"
#include "sembox/xxt.hpp"

using namespace sembox;

namespace {

Field make_vec(int n, std::uint64_t seed) {
  Field f(GridTag::velocity, 1, n); // n^3 entries as a flat dof vector
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (double& v : f.v) v = dist(rng);
  return f;
}

SparseSpd laplacian_chain(int n) {
  std::vector<std::pair<std::pair<int, int>, double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.push_back({{i, i}, 2.0});
    if (i > 0) trip.push_back({{i, i - 1}, -1.0});
    if (i + 1 < n) trip.push_back({{i, i + 1}, -1.0});
  }
  return SparseSpd::from_triplets(n, std::move(trip));
}

SparseSpd random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = dist(rng);
  Eigen::MatrixXd a = m * m.transpose() + 0.5 * n * Eigen::MatrixXd::Identity(n, n);
  std::vector<std::pair<std::pair<int, int>, double>> trip;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) trip.push_back({{i, j}, a(i, j)});
  return SparseSpd::from_triplets(n, std::move(trip));
}

} // namespace

TEST_CASE("pcg solves the identity in one iteration") {
  const ApplyFn identity = [](const Field& x, Field& y) { field_copy(x, y); };
  Field b = make_vec(3, 1), x(GridTag::velocity, 1, 3);
  KrylovConfig cfg;
  cfg.tolerance = 1e-12;
  const PcgResult r = pcg(identity, b, nullptr, field_dot, cfg, x);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (std::int64_t a = 0; a < b.size(); ++a)
    CHECK(x.v[a] == doctest::Approx(b.v[a]).epsilon(1e-12));
}

TEST_CASE("jacobi is an exact preconditioner for diagonal systems") {
  const int n = 2; // 8 dofs
  Field diag(GridTag::velocity, 1, n);
  for (std::int64_t a = 0; a < diag.size(); ++a)
    diag.v[a] = std::pow(10.0, 4.0 * a / (diag.size() - 1)); // condition 1e4
  const ApplyFn apply = [&](const Field& x, Field& y) {
    y = x;
    for (std::int64_t a = 0; a < x.size(); ++a) y.v[a] *= diag.v[a];
  };
  const PrecondFn pre = [&](const Field& r, Field& z) {
    z = r;
    for (std::int64_t a = 0; a < r.size(); ++a) z.v[a] /= diag.v[a];
  };
  Field b = make_vec(n, 2), x(GridTag::velocity, 1, n);
  KrylovConfig cfg;
  cfg.tolerance = 1e-10;
  const PcgResult r = pcg(apply, b, pre, field_dot, cfg, x);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("pcg matches a dense direct solve and decreases the error A-norm") {
  const int n = 2; // 8 dofs
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::MatrixXd m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = dist(rng);
  const Eigen::MatrixXd a = m * m.transpose() + 2.0 * Eigen::MatrixXd::Identity(8, 8);

  const ApplyFn apply = [&](const Field& x, Field& y) {
    y = x;
    Eigen::Map<const Eigen::VectorXd> xv(x.v.data(), 8);
    Eigen::Map<Eigen::VectorXd> yv(y.v.data(), 8);
    yv = a * xv;
  };
  Field b = make_vec(n, 6), x(GridTag::velocity, 1, n);
  Eigen::Map<const Eigen::VectorXd> bv(b.v.data(), 8);
  const Eigen::VectorXd exact = a.ldlt().solve(bv);

  std::vector<double> anorms;
  const PcgObserver obs = [&](int, const Field& xk, const Field&) {
    Eigen::Map<const Eigen::VectorXd> xv(xk.v.data(), 8);
    const Eigen::VectorXd e = xv - exact;
    anorms.push_back(std::sqrt(e.dot(a * e)));
  };
  KrylovConfig cfg;
  cfg.tolerance = 1e-12;
  const PcgResult r = pcg(apply, b, nullptr, field_dot, cfg, x, obs);
  CHECK(r.converged);
  for (int i = 0; i < 8; ++i) CHECK(x.v[i] == doctest::Approx(exact(i)).epsilon(1e-9));
  for (std::size_t i = 1; i < anorms.size(); ++i)
    CHECK(anorms[i] <= anorms[i - 1] + 1e-13);
}

TEST_CASE("pcg reports NaN divergence with the iteration") {
  const ApplyFn bad = [](const Field& x, Field& y) {
    y = x;
    for (double& v : y.v) v = std::numeric_limits<double>::quiet_NaN();
  };
  Field b = make_vec(2, 3), x(GridTag::velocity, 1, 2);
  KrylovConfig cfg;
  CHECK_THROWS_AS(pcg(bad, b, nullptr, field_dot, cfg, x), SolverError);
}

TEST_CASE("pcg reports non-convergence without throwing") {
  const int n = 2;
  Field diag(GridTag::velocity, 1, n);
  for (std::int64_t a = 0; a < diag.size(); ++a) diag.v[a] = 1.0 + a;
  const ApplyFn apply = [&](const Field& x, Field& y) {
    y = x;
    for (std::int64_t a = 0; a < x.size(); ++a) y.v[a] *= diag.v[a];
  };
  Field b = make_vec(n, 9), x(GridTag::velocity, 1, n);
  KrylovConfig cfg;
  cfg.tolerance = 1e-14;
  cfg.max_iterations = 1;
  const PcgResult r = pcg(apply, b, nullptr, field_dot, cfg, x);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("projection history reuses prior solutions") {
  const int n = 2;
  Field diag(GridTag::velocity, 1, n);
  for (std::int64_t a = 0; a < diag.size(); ++a) diag.v[a] = 2.0 + 0.25 * a;
  const ApplyFn apply = [&](const Field& x, Field& y) {
    y = x;
    for (std::int64_t a = 0; a < x.size(); ++a) y.v[a] *= diag.v[a];
  };
  KrylovConfig cfg;
  cfg.tolerance = 1e-11;

  SUBCASE("depth zero means zero guess") {
    ProjectionHistory hist(0);
    Field b = make_vec(n, 30);
    const Field guess = hist.project_guess(b, field_dot);
    CHECK(field_max_abs(guess) == 0.0);
  }

  SUBCASE("an identical rhs converges immediately") {
    ProjectionHistory hist(4);
    Field b = make_vec(n, 31);
    Field x = hist.project_guess(b, field_dot);
    pcg(apply, b, nullptr, field_dot, cfg, x);
    hist.append(x, apply, field_dot);

    Field x2 = hist.project_guess(b, field_dot);
    const PcgResult r2 = pcg(apply, b, nullptr, field_dot, cfg, x2);
    CHECK(r2.converged);
    CHECK(r2.iterations <= 1);
  }

  SUBCASE("projected residual is orthogonal to the span") {
    ProjectionHistory hist(4);
    for (std::uint64_t s = 40; s < 43; ++s) {
      Field b = make_vec(n, s);
      Field x = hist.project_guess(b, field_dot);
      pcg(apply, b, nullptr, field_dot, cfg, x);
      hist.append(x, apply, field_dot);
    }
    Field b = make_vec(n, 50), deflated(GridTag::velocity, 1, n);
    hist.project_guess(b, field_dot, &deflated);
    for (const auto& [xb, yb] : hist.entries())
      CHECK(std::abs(field_dot(xb, deflated)) < 1e-10);
  }

  SUBCASE("eviction keeps at most depth entries") {
    ProjectionHistory hist(2);
    for (std::uint64_t s = 60; s < 66; ++s) {
      Field b = make_vec(n, s);
      Field x = hist.project_guess(b, field_dot);
      pcg(apply, b, nullptr, field_dot, cfg, x);
      hist.append(x, apply, field_dot);
    }
    CHECK(hist.size() == 2);
  }
}

TEST_CASE("xxt factors tiny closed-form matrices") {
  SUBCASE("diagonal") {
    const SparseSpd a =
        SparseSpd::from_triplets(2, {{{0, 0}, 2.0}, {{1, 1}, 2.0}});
    const XXTFactor f = xxt_factor(a);
    // X = diag(1/sqrt(2))
    std::array<std::array<double, 2>, 2> x{{{0, 0}, {0, 0}}};
    for (std::size_t j = 0; j < f.cols.size(); ++j)
      for (const auto& [r, v] : f.cols[j]) x[r][j] = v;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(x[0][0]) + std::abs(x[0][1]) - inv_sqrt2) < 1e-14);
    CHECK(std::abs(std::abs(x[1][0]) + std::abs(x[1][1]) - inv_sqrt2) < 1e-14);
  }
  SUBCASE("tridiagonal 2x2 inverse") {
    const SparseSpd a = SparseSpd::from_triplets(
        2, {{{0, 0}, 2.0}, {{0, 1}, -1.0}, {{1, 0}, -1.0}, {{1, 1}, 2.0}});
    const XXTFactor f = xxt_factor(a);
    // X X' = A^-1 = (1/3) [[2,1],[1,2]]
    double xxt[2][2] = {{0, 0}, {0, 0}};
    for (const auto& col : f.cols) {
      double dense[2] = {0, 0};
      for (const auto& [r, v] : col) dense[r] = v;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) xxt[i][j] += dense[i] * dense[j];
    }
    CHECK(xxt[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(xxt[0][1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(xxt[1][1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    const std::vector<double> x = xxt_solve(f, {1.0, 0.0});
    CHECK(x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("xxt inverts random SPD matrices") {
  const SparseSpd a = random_spd(100, 77);
  const XXTFactor f = xxt_factor(a);
  // ||X X' A - I||_max via columns of A
  double worst = 0.0;
  for (int c = 0; c < a.n; ++c) {
    std::vector<double> e(a.n, 0.0), col;
    e[c] = 1.0;
    a.multiply(e, col);
    const std::vector<double> x = xxt_solve(f, col);
    for (int r = 0; r < a.n; ++r)
      worst = std::max(worst, std::abs(x[r] - (r == c ? 1.0 : 0.0)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("xxt solve hits the dense solution on larger systems") {
  const SparseSpd a = random_spd(200, 123);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> b(200);
  for (double& v : b) v = dist(rng);
  const std::vector<double> zero = xxt_solve(xxt_factor(a), std::vector<double>(200, 0.0));
  for (double v : zero) CHECK(v == 0.0);

  const std::vector<double> x = xxt_solve(xxt_factor(a), b);
  std::vector<double> ax;
  a.multiply(x, ax);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 200; ++i) {
    num += (ax[i] - b[i]) * (ax[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-9);
}

TEST_CASE("xxt rejects indefinite matrices naming the pivot") {
  const SparseSpd a = SparseSpd::from_triplets(
      2, {{{0, 0}, 1.0}, {{0, 1}, 3.0}, {{1, 0}, 3.0}, {{1, 1}, 1.0}});
  try {
    xxt_factor(a);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot_index >= 0);
  }
  CHECK_THROWS_AS(xxt_solve(xxt_factor(laplacian_chain(4)), std::vector<double>(5, 1.0)),
                  ContractViolation);
}

TEST_CASE("nested dissection keeps chain factors sparse") {
  const int n = 100;
  const XXTFactor f = xxt_factor(laplacian_chain(n));
  CHECK(f.nnz() > 0);
  CHECK(f.nnz() < n * (n + 1) / 4); // well below dense triangular fill
}

TEST_CASE("xxt agrees with dense solves on small mesh-vertex operators") {
  // vertex-graph Laplacians (+ I) of small boxes, dimensions <= 50
  for (int ex = 1; ex <= 3; ++ex)
    for (int ey = 1; ey <= 2; ++ey)
      for (int ez = 1; ez <= 2; ++ez) {
        const int vx = ex + 1, vy = ey + 1, vz = ez + 1;
        const int n = vx * vy * vz;
        if (n > 50) continue;
        std::vector<std::pair<std::pair<int, int>, double>> trip;
        auto vid = [&](int i, int j, int k) { return i + vx * (j + vy * k); };
        for (int k = 0; k < vz; ++k)
          for (int j = 0; j < vy; ++j)
            for (int i = 0; i < vx; ++i) {
              double deg = 1.0; // + I regularization
              auto link = [&](int ii, int jj, int kk) {
                if (ii < 0 || jj < 0 || kk < 0 || ii >= vx || jj >= vy || kk >= vz) return;
                trip.push_back({{vid(i, j, k), vid(ii, jj, kk)}, -1.0});
                deg += 1.0;
              };
              link(i - 1, j, k);
              link(i + 1, j, k);
              link(i, j - 1, k);
              link(i, j + 1, k);
              link(i, j, k - 1);
              link(i, j, k + 1);
              trip.push_back({{vid(i, j, k), vid(i, j, k)}, deg});
            }
        const SparseSpd a = SparseSpd::from_triplets(n, std::move(trip));
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int r = 0; r < n; ++r)
          for (std::int64_t c = a.row_ptr[r]; c < a.row_ptr[r + 1]; ++c)
            dense(r, a.col[c]) = a.val[c];
        std::mt19937_64 rng(1000 + n);
        std::uniform_real_distribution<double> dist(-1, 1);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = dist(rng);
        const Eigen::VectorXd exact = dense.ldlt().solve(b);
        const std::vector<double> x =
            xxt_solve(xxt_factor(a), std::vector<double>(b.data(), b.data() + n));
        for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(exact(i)).epsilon(1e-9));
      }
}
