#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "l1rom/minimize.hpp"
#include "l1rom/rng.hpp"

using namespace l1rom;

namespace {

Matrix random_matrix(std::size_t n, std::size_t k, Rng& rng) {
  Matrix m(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, j) = rng.uniform(-1, 1);
  return m;
}

double l1_objective(const Matrix& a, std::span<const double> b, std::span<const double> q) {
  auto r = mat_vec(a, q);
  double s = 0;
  for (std::size_t i = 0; i < r.size(); ++i) s += std::abs(r[i] + b[i]);
  return s;
}

// independent oracle: scan the piecewise-linear objective of a 1-column
// problem on a fine grid around the data points
double scan_oracle_1d(std::span<const double> column, std::span<const double> b,
                      double* best_q) {
  double lo = -20, hi = 20;
  double best = std::numeric_limits<double>::infinity(), arg = 0;
  for (int pass = 0; pass < 4; ++pass) {
    const int steps = 4000;
    for (int s = 0; s <= steps; ++s) {
      const double q = lo + (hi - lo) * s / steps;
      double obj = 0;
      for (std::size_t i = 0; i < b.size(); ++i) obj += std::abs(column[i] * q + b[i]);
      if (obj < best) {
        best = obj;
        arg = q;
      }
    }
    const double w = (hi - lo) / 50;
    lo = arg - w;
    hi = arg + w;
  }
  if (best_q) *best_q = arg;
  return best;
}

// dense normal-equations oracle written independently of the library path:
// plain Gaussian elimination with partial pivoting on (Z^T W^2 Z + eta I)
std::vector<double> dense_wlsq_oracle(const Matrix& z, std::span<const double> r,
                                      std::span<const double> w, double eta,
                                      std::span<const double> q) {
  const std::size_t n = z.rows(), k = z.cols();
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t i = 0; i < n; ++i)
        g[a][b] += z(i, a) * w[i] * w[i] * z(i, b);
    g[a][a] += eta;
    double rhs = 0;
    for (std::size_t i = 0; i < n; ++i) rhs += z(i, a) * w[i] * w[i] * r[i];
    g[a][k] = -(rhs + eta * q[a]);
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < k; ++row)
      if (std::abs(g[row][col]) > std::abs(g[piv][col])) piv = row;
    std::swap(g[col], g[piv]);
    for (std::size_t row = col + 1; row < k; ++row) {
      const double f = g[row][col] / g[col][col];
      for (std::size_t c = col; c <= k; ++c) g[row][c] -= f * g[col][c];
    }
  }
  std::vector<double> x(k);
  for (std::size_t row = k; row-- > 0;) {
    double s = g[row][k];
    for (std::size_t c = row + 1; c < k; ++c) s -= g[row][c] * x[c];
    x[row] = s / g[row][row];
  }
  return x;
}

}  // namespace

TEST_CASE("huber_value branches and breakpoint") {
  CHECK(huber_value(0.5, 1.0) == doctest::Approx(0.25));
  CHECK(huber_value(2.0, 1.0) == doctest::Approx(3.0));
  CHECK(huber_value(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(huber_value(-2.0, 1.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(huber_value(1.0, 0.0), std::invalid_argument);

  // C1 across the breakpoint: finite differences approach 2M from both sides
  const double m = 0.75;
  for (double h : {1e-4, 1e-6, 1e-8}) {
    const double left = (huber_value(m, m) - huber_value(m - h, m)) / h;
    const double right = (huber_value(m + h, m) - huber_value(m, m)) / h;
    CHECK(std::abs(left - 2 * m) <= 10 * h + 1e-9);
    CHECK(std::abs(right - 2 * m) <= 10 * h + 1e-9);
  }
}

TEST_CASE("weighted_lsq exact and limiting cases") {
  // w = 1, eta = 0, Z = I: dq = -r
  Matrix eye = Matrix::identity(4);
  std::vector<double> r{1, -2, 3, 0.5}, w(4, 1.0), q(4, 0.0);
  auto dq = weighted_lsq(eye, r, w, 0.0, q);
  for (int i = 0; i < 4; ++i) CHECK(dq[i] == doctest::Approx(-r[i]).epsilon(1e-12));

  // eta -> infinity drives q + dq to 0
  std::vector<double> qc{0.4, -0.2, 1.0, 0.7};
  dq = weighted_lsq(eye, r, w, 1e14, qc);
  for (int i = 0; i < 4; ++i) CHECK(qc[i] + dq[i] == doctest::Approx(0.0).epsilon(1e-9));

  // rank-deficient with eta = 0 errors out
  Matrix flat(3, 2);
  for (int i = 0; i < 3; ++i) {
    flat(i, 0) = 1.0;
    flat(i, 1) = 1.0;
  }
  std::vector<double> r3{1, 2, 3}, w3(3, 1.0), q2(2, 0.0);
  CHECK_THROWS_AS(weighted_lsq(flat, r3, w3, 0.0, q2), solver_error);
}

TEST_CASE("weighted_lsq matches the dense oracle on random instances") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform(0, 30));
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform(0, 5));
    Matrix z = random_matrix(n, k, rng);
    std::vector<double> r(n), w(n), q(k);
    for (auto& x : r) x = rng.uniform(-2, 2);
    for (auto& x : w) x = rng.uniform(0.1, 2);
    for (auto& x : q) x = rng.uniform(-1, 1);
    const double eta = trial % 2 ? 1e-6 : 1e-2;

    const auto got = weighted_lsq(z, r, w, eta, q);
    const auto want = dense_wlsq_oracle(z, r, w, eta, q);
    for (std::size_t j = 0; j < k; ++j)
      CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));
  }
}

TEST_CASE("l1_min_lp: square invertible interpolates exactly") {
  Rng rng(31);
  Matrix a(4, 4);
  do {
    a = random_matrix(4, 4, rng);
  } while (false);
  std::vector<double> b{0.5, -1, 2, 0.25};
  const auto rep = l1_min_lp(a, b);
  CHECK(rep.converged);
  CHECK(rep.objective <= 1e-10);
  auto r = mat_vec(a, rep.q);
  for (int i = 0; i < 4; ++i) CHECK(r[i] + b[i] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("l1_min_lp: median instance against the scan oracle") {
  Matrix a(3, 1);
  a(0, 0) = a(1, 0) = a(2, 0) = 1.0;
  std::vector<double> b{-1, -2, -10};

  double q_scan = 0;
  const double obj_scan = scan_oracle_1d(a.col(0), b, &q_scan);
  CHECK(q_scan == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(obj_scan == doctest::Approx(9.0).epsilon(1e-3));

  const auto rep = l1_min_lp(a, b);
  CHECK(rep.q[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.objective == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("l1_min_lp: unit simplex hits a convex-hull target") {
  Matrix a = Matrix::identity(2);
  std::vector<double> b{-0.3, -0.7};
  const auto rep = l1_min_lp(a, b, Constraint::unit_simplex);
  CHECK(rep.q[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(rep.q[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(rep.objective <= 1e-12);
}

TEST_CASE("l1_min_lp: size cap is enforced") {
  Matrix a(8, 1);
  std::vector<double> b(8, 1.0);
  CHECK_THROWS_AS(l1_min_lp(a, b, Constraint::none, 4), solver_error);
}

TEST_CASE("irls_l1 on the median instance") {
  Matrix a(3, 1);
  a(0, 0) = a(1, 0) = a(2, 0) = 1.0;
  MinimizeProblem p = linear_problem(a, {-1, -2, -10}, 1e-8);
  const auto rep = irls_l1(p, std::vector<double>{0.0}, 1e-10);
  CHECK(rep.converged);
  CHECK(rep.q[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("irls_l1 immediate convergence from a zero-residual minimizer") {
  Rng rng(17);
  Matrix a = random_matrix(6, 3, rng);
  std::vector<double> q_true{0.2, -0.4, 1.1};
  auto b = mat_vec(a, q_true);
  for (auto& x : b) x = -x;
  MinimizeProblem p = linear_problem(a, b, 1e-10);
  const auto rep = irls_l1(p, q_true, 1e-8);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
  CHECK(rep.objective <= 1e-8);
}

TEST_CASE("irls_l1 agrees with the LP oracle on random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 20 + static_cast<std::size_t>(rng.uniform(0, 60));
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform(0, 5));
    Matrix a = random_matrix(n, k, rng);
    std::vector<double> b(n);
    for (auto& x : b) x = rng.uniform(-2, 2);

    const auto lp = l1_min_lp(a, b);
    MinimizeProblem p = linear_problem(a, b, 1e-8);
    const auto irls = irls_l1(p, std::vector<double>(k, 1.0 / k), 1e-10);
    CHECK(std::abs(irls.objective - lp.objective) <= 1e-6 * (1.0 + lp.objective));
  }
}

TEST_CASE("irls objective is non-increasing on linear problems") {
  // re-runs the solver with growing iteration budget; a cheap way to watch
  // the accepted iterates without instrumenting the loop
  Rng rng(55);
  Matrix a = random_matrix(40, 4, rng);
  std::vector<double> b(40);
  for (auto& x : b) x = rng.uniform(-1, 1);
  MinimizeProblem p = linear_problem(a, b, 1e-8);

  std::vector<double> q(4, 0.25);
  double prev = std::numeric_limits<double>::infinity();
  for (int budget = 1; budget <= 12; ++budget) {
    // one fresh weighted step from the current iterate
    auto r = p.residual(q);
    double rmax = 0;
    for (double x : r) rmax = std::max(rmax, std::abs(x));
    const double delta = 1e-10 * std::max(1.0, rmax);
    std::vector<double> w(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      w[i] = 1.0 / std::sqrt(std::max(std::abs(r[i]), delta));
    auto dq = weighted_lsq(p.jacobian(q), r, w, p.eta, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += dq[j];

    double obj = l1_objective(a, b, q);
    for (double qi : q) obj += p.eta * qi * qi;
    CHECK(obj <= prev + 1e-9 * (1.0 + std::abs(prev)));
    prev = obj;
  }
}

TEST_CASE("irls_huber: below-threshold instance reduces to least squares") {
  Rng rng(71);
  Matrix a = random_matrix(10, 2, rng);
  std::vector<double> q_true{0.5, -0.25};
  auto b = mat_vec(a, q_true);
  for (auto& x : b) x = -x;
  // all residuals from q0 = q_true are zero, below any M
  MinimizeProblem p = linear_problem(a, b, 1e-9);
  const auto rep = irls_huber(p, q_true, 1e-8);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
}

TEST_CASE("irls_huber approaches the L1 answer on the median instance") {
  Matrix a(3, 1);
  a(0, 0) = a(1, 0) = a(2, 0) = 1.0;
  MinimizeProblem p = linear_problem(a, {-1, -2, -10}, 1e-8);
  const auto rep = irls_huber(p, std::vector<double>{0.0}, 1e-10);
  CHECK(rep.q[0] == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("l2_min: linear full-rank case equals the normal equations") {
  Rng rng(83);
  Matrix a = random_matrix(30, 4, rng);
  std::vector<double> b(30);
  for (auto& x : b) x = rng.uniform(-1, 1);
  MinimizeProblem p = linear_problem(a, b, 0.0);

  const auto rep = l2_min(p, std::vector<double>(4, 0.0), 1e-12);
  std::vector<double> w(30, 1.0), q0(4, 0.0);
  const auto direct = dense_wlsq_oracle(a, b, w, 0.0, q0);
  for (int j = 0; j < 4; ++j)
    CHECK(rep.q[j] == doctest::Approx(direct[j]).epsilon(1e-10));

  // reachable zero-residual case
  std::vector<double> q_true{1, -1, 0.5, 2};
  auto b2 = mat_vec(a, q_true);
  for (auto& x : b2) x = -x;
  MinimizeProblem p2 = linear_problem(a, b2, 0.0);
  const auto rep2 = l2_min(p2, std::vector<double>(4, 0.0), 1e-12);
  CHECK(rep2.objective <= 1e-12);
}

TEST_CASE("galerkin_solve: orthonormal linear case gives q = -V^T b") {
  // r(w) = w + b with V orthonormal columns
  Matrix v(4, 2);
  v(0, 0) = 1.0;
  v(1, 1) = 1.0;
  std::vector<double> b{0.3, -0.6, 0.9, 0.1};
  MinimizeProblem p = linear_problem(v, b, 0.0);
  p.basis = v;
  const auto rep = galerkin_solve(p, std::vector<double>{0, 0}, 1e-12);
  CHECK(rep.converged);
  CHECK(rep.q[0] == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(rep.q[1] == doctest::Approx(0.6).epsilon(1e-10));

  MinimizeProblem no_basis = linear_problem(v, b, 0.0);
  no_basis.basis = Matrix();
  CHECK_THROWS_AS(galerkin_solve(no_basis, std::vector<double>{0, 0}, 1e-8),
                  std::invalid_argument);
}

TEST_CASE("galerkin rejects a singular reduced Jacobian") {
  Matrix v(6, 2);
  for (int i = 0; i < 6; ++i) {
    v(i, 0) = 1.0;
    v(i, 1) = 1.0;  // duplicated column
  }
  std::vector<double> b{1, 2, 3, 4, 5, 6};
  MinimizeProblem p = linear_problem(v, b, 0.0);
  p.basis = v;
  CHECK_THROWS_AS(galerkin_solve(p, std::vector<double>{0, 0}, 1e-8), solver_error);
}

TEST_CASE("galerkin agrees with l2_min on an SPD linear residual") {
  Rng rng(29);
  // A = M^T M + I is SPD; r(w) = A w + b restricted to a random basis
  Matrix m = random_matrix(6, 6, rng);
  Matrix a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (int l = 0; l < 6; ++l) s += m(l, i) * m(l, j);
      a(i, j) = s;
    }
  Matrix v = random_matrix(6, 2, rng);
  Matrix av(6, 2);
  for (int j = 0; j < 2; ++j) {
    auto col = mat_vec(a, v.col(j));
    std::copy(col.begin(), col.end(), av.col(j).begin());
  }
  std::vector<double> b(6);
  for (auto& x : b) x = rng.uniform(-1, 1);

  MinimizeProblem pg = linear_problem(av, b, 0.0);
  pg.basis = v;
  const auto g = galerkin_solve(pg, std::vector<double>{0, 0}, 1e-12);

  // l2 on the SPD-weighted problem: minimize ||A^{1/2}(V q) + A^{-1/2} b||^2
  // has the same normal equations V^T A V q = -V^T b; check via direct solve
  std::vector<double> rhs = mat_tvec(v, b);
  Matrix red(2, 2);
  for (int p2 = 0; p2 < 2; ++p2)
    for (int q2 = 0; q2 < 2; ++q2) {
      double s = 0;
      for (int i = 0; i < 6; ++i) s += v(i, p2) * av(i, q2);
      red(p2, q2) = s;
    }
  std::vector<double> direct;
  REQUIRE(lu_solve(red, {-rhs[0], -rhs[1]}, direct));
  CHECK(g.q[0] == doctest::Approx(direct[0]).epsilon(1e-8));
  CHECK(g.q[1] == doctest::Approx(direct[1]).epsilon(1e-8));
}

TEST_CASE("unit simplex constraint holds exactly on returned iterates") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a = random_matrix(25, 4, rng);
    std::vector<double> b(25);
    for (auto& x : b) x = rng.uniform(-1, 1);

    MinimizeProblem p = linear_problem(a, b, 1e-8, Constraint::unit_simplex);
    for (auto rep : {irls_l1(p, std::vector<double>(4, 0.25), 1e-8),
                     l1_min_lp(a, b, Constraint::unit_simplex)}) {
      double sum = 0;
      for (double qi : rep.q) {
        CHECK(qi >= -1e-12);
        sum += qi;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("jacobian consistency via directional finite differences") {
  Rng rng(77);
  // nonlinear residual r_i(w) = w_i^2 - c_i through a fixed basis
  Matrix v = random_matrix(12, 3, rng);
  std::vector<double> c(12);
  for (auto& x : c) x = rng.uniform(0.5, 1.5);

  MinimizeProblem p;
  p.k = 3;
  p.basis = v;
  p.residual = [&](std::span<const double> q) {
    auto w = mat_vec(v, q);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] * w[i] - c[i];
    return w;
  };
  p.jacobian = [&](std::span<const double> q) {
    auto w = mat_vec(v, q);
    Matrix z(12, 3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 12; ++i) z(i, j) = 2.0 * w[i] * v(i, j);
    return z;
  };

  std::vector<double> q{0.3, -0.2, 0.5};
  const Matrix z = p.jacobian(q);
  for (int dir = 0; dir < 5; ++dir) {
    std::vector<double> d(3);
    for (auto& x : d) x = rng.uniform(-1, 1);
    const double h = 1e-6;
    std::vector<double> qp(q), qm(q);
    for (int j = 0; j < 3; ++j) {
      qp[j] += h * d[j];
      qm[j] -= h * d[j];
    }
    const auto rp = p.residual(qp);
    const auto rm = p.residual(qm);
    const auto zd = mat_vec(z, d);
    for (int i = 0; i < 12; ++i)
      CHECK((rp[i] - rm[i]) / (2 * h) == doctest::Approx(zd[i]).epsilon(1e-5));
  }
}
