#include "l1rom/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace l1rom {

namespace {

void check_finite(std::span<const double> v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x)) throw solver_error(std::string(who) + ": non-finite residual");
}

double linf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

}  // namespace

MinimizeProblem linear_problem(Matrix a_eff, std::vector<double> b, double eta,
                               Constraint constraint) {
  auto a = std::make_shared<Matrix>(std::move(a_eff));
  auto rhs = std::make_shared<std::vector<double>>(std::move(b));
  MinimizeProblem p;
  p.k = a->cols();
  p.eta = eta;
  p.constraint = constraint;
  p.linear = true;
  p.residual = [a, rhs](std::span<const double> q) {
    auto r = mat_vec(*a, q);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += (*rhs)[i];
    return r;
  };
  p.jacobian = [a](std::span<const double>) { return *a; };
  p.basis = *a;
  return p;
}

double huber_value(double x, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("huber_value: M must be positive");
  const double ax = std::abs(x);
  return ax <= m ? x * x : m * (2.0 * ax - m);
}

std::vector<double> weighted_lsq(const Matrix& z, std::span<const double> r,
                                 std::span<const double> w, double eta,
                                 std::span<const double> q_current) {
  const std::size_t n = z.rows(), k = z.cols();
  if (r.size() != n || w.size() != n || q_current.size() != k)
    throw std::invalid_argument("weighted_lsq: shape mismatch");
  for (double wi : w)
    if (!(wi >= 0.0) || !std::isfinite(wi))
      throw std::invalid_argument("weighted_lsq: weights must be finite and nonnegative");

  // Stacked least squares [W Z; sqrt(eta) I] dq = -[W r; sqrt(eta) q]: the
  // same minimizer as the regularized normal equations without squaring the
  // (often extreme) weight range.
  const double root_eta = std::sqrt(eta);
  Matrix aug(n + k, k);
  std::vector<double> rhs(n + k);
  for (std::size_t j = 0; j < k; ++j) {
    auto src = z.col(j);
    auto dst = aug.col(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = w[i] * src[i];
    dst[n + j] = root_eta;
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] = -w[i] * r[i];
  for (std::size_t j = 0; j < k; ++j) rhs[n + j] = -root_eta * q_current[j];

  std::vector<double> dq;
  if (!qr_least_squares(std::move(aug), std::move(rhs), dq)) {
    if (eta == 0.0)
      throw solver_error("weighted_lsq: rank-deficient system with eta = 0");
    throw solver_error("weighted_lsq: ill-conditioned weighted system");
  }
  return dq;
}

namespace {

enum class WeightRule { l1, huber };

/// Exact L1 descent from the vertex defined by the k smallest residuals of
/// an affine problem r(q) = A q + b: repeatedly test the dual condition
/// |lambda| <= 1 and, when violated, move along the freed basis direction to
/// the weighted-median breakpoint. Each exchange strictly lowers ||r||_1.
/// Returns the number of exchanges taken; *optimal reports whether the dual
/// test finally passed.
int exchange_descent(const Matrix& a, std::vector<double>& q, std::vector<double>& r,
                     int budget, bool* optimal) {
  *optimal = false;
  const std::size_t n = a.rows(), k = a.cols();
  if (k == 0 || n <= k) return 0;

  // constant offset b = r - A q
  std::vector<double> b(n);
  {
    const std::vector<double> aq = mat_vec(a, q);
    for (std::size_t i = 0; i < n; ++i) b[i] = r[i] - aq[i];
  }

  // Seed with the rows that pin the current reweighted fit hardest:
  // largest ||A_i||^2 / |r_i|. Plain smallest-|r| would pick decoupled
  // rows whose residuals are tiny only because the rows themselves are.
  std::vector<double> row_norm(n, 0.0);
  double max_row_norm = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    auto cj = a.col(j);
    for (std::size_t i = 0; i < n; ++i) row_norm[i] += cj[i] * cj[i];
  }
  for (double rn : row_norm) max_row_norm = std::max(max_row_norm, rn);
  if (max_row_norm == 0.0) return 0;

  const double r_tiny = 1e-300;
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::partial_sort(active.begin(), active.begin() + k, active.end(),
                    [&](std::size_t x, std::size_t y) {
                      return row_norm[x] / std::max(std::abs(r[x]), r_tiny) >
                             row_norm[y] / std::max(std::abs(r[y]), r_tiny);
                    });
  active.resize(k);

  // the snap to the nearest vertex may move uphill; exchanges descend to the
  // global optimum from there, and the incoming iterate stays the fallback
  const std::vector<double> q_in = q;
  const std::vector<double> r_in = r;
  const double f_in = l1_norm(r);

  auto restore_if_worse = [&](int steps) {
    if (l1_norm(r) > f_in) {
      q = q_in;
      r = r_in;
    }
    return steps;
  };

  double f_prev = std::numeric_limits<double>::infinity();
  int steps = 0;
  while (steps < budget) {
    Matrix ab(k, k);
    std::vector<double> rhs(k);
    for (std::size_t row = 0; row < k; ++row) {
      for (std::size_t j = 0; j < k; ++j) ab(row, j) = a(active[row], j);
      rhs[row] = -b[active[row]];
    }
    std::vector<double> q_vertex;
    if (!lu_solve(ab, std::move(rhs), q_vertex))
      return restore_if_worse(steps);  // singular basis
    double qmax = 0.0;
    for (double x : q_vertex) qmax = std::max(qmax, std::abs(x));
    if (qmax > 1e6 * (1.0 + linf(q_in)))
      return restore_if_worse(steps);  // basis numerically singular

    std::vector<double> r_vertex = mat_vec(a, q_vertex);
    for (std::size_t i = 0; i < n; ++i) r_vertex[i] += b[i];
    double f = 0.0;
    for (double x : r_vertex) f += std::abs(x);
    if (f >= f_prev - 1e-14 * (1.0 + f_prev) && steps > 0)
      return restore_if_worse(steps);  // stalled
    q = q_vertex;
    r = r_vertex;
    f_prev = f;

    const double tiny = 1e-12 * std::max(1.0, linf(r));
    std::vector<char> in_basis(n, 0);
    for (std::size_t row : active) in_basis[row] = 1;

    std::vector<double> g(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_basis[i] || std::abs(r[i]) <= tiny) continue;
      const double s = r[i] > 0.0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < k; ++j) g[j] += s * a(i, j);
    }
    Matrix abt(k, k);
    for (std::size_t row = 0; row < k; ++row)
      for (std::size_t j = 0; j < k; ++j) abt(j, row) = a(active[row], j);
    std::vector<double> lambda, neg(k);
    for (std::size_t j = 0; j < k; ++j) neg[j] = -g[j];
    if (!lu_solve(abt, std::move(neg), lambda)) return restore_if_worse(steps);

    std::size_t worst = k;
    double worst_mag = 1.0 + 1e-9;
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(lambda[j]) > worst_mag) {
        worst_mag = std::abs(lambda[j]);
        worst = j;
      }
    if (worst == k) {
      *optimal = true;
      return steps;  // the optimal vertex is at or below every other point
    }

    // direction with A_B d = sigma e_worst
    const double sigma = lambda[worst] > 0.0 ? 1.0 : -1.0;
    Matrix ab2(k, k);
    std::vector<double> e(k, 0.0);
    for (std::size_t row = 0; row < k; ++row)
      for (std::size_t j = 0; j < k; ++j) ab2(row, j) = a(active[row], j);
    e[worst] = sigma;
    std::vector<double> d;
    if (!lu_solve(ab2, std::move(e), d)) return restore_if_worse(steps);

    const std::vector<double> ad = mat_vec(a, d);
    double slope = 1.0 - worst_mag;  // dF/dt at t = 0+
    struct Event {
      double t, weight;
      std::size_t row;
    };
    std::vector<Event> events;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_basis[i] || ad[i] == 0.0) continue;
      if (std::abs(r[i]) <= tiny) {
        slope += std::abs(ad[i]);  // degenerate rows resist immediately
        continue;
      }
      const double t = -r[i] / ad[i];
      if (t > 0.0) events.push_back({t, std::abs(ad[i]), i});
    }
    if (slope >= 0.0) return restore_if_worse(steps);  // blocked by degeneracy
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
      return x.t < y.t || (x.t == y.t && x.row < y.row);
    });
    std::size_t entering = n;
    for (const Event& ev : events) {
      slope += 2.0 * ev.weight;
      if (slope >= 0.0) {
        entering = ev.row;
        break;
      }
    }
    if (entering == n) return restore_if_worse(steps);  // numerically unbounded
    active[worst] = entering;
    ++steps;
  }
  return restore_if_worse(steps);
}

MinimizeReport irls_loop(const MinimizeProblem& p, std::span<const double> q0,
                         double eps_tol, WeightRule rule, double eps2) {
  if (!(eps_tol > 0.0)) throw std::invalid_argument("irls: eps_tol must be positive");
  const std::size_t k = p.k;
  std::vector<double> q(q0.begin(), q0.end());
  if (q.size() != k) throw std::invalid_argument("irls: bad initial guess size");

  std::vector<double> r = p.residual(q);
  check_finite(r, "irls");
  Matrix z = p.jacobian(q);

  double m_huber = eps2 * std::max(1.0, linf(r));
  int floor_hits = 0;
  int l = 0;
  bool converged = false;
  const int cap = 200;
  const bool can_exchange =
      rule == WeightRule::l1 && p.linear && p.constraint == Constraint::none;
  double obj_window = std::numeric_limits<double>::infinity();

  std::vector<double> w(r.size());
  while (true) {
    if (rule == WeightRule::l1) {
      const double delta = 1e-10 * std::max(1.0, linf(r));
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double ai = std::abs(r[i]);
        if (ai < delta) ++floor_hits;
        w[i] = 1.0 / std::sqrt(std::max(ai, delta));
      }
    } else {
      // The Huber normal equations want weight^2 = 1 below M and M/|r|
      // above. The whole vector is rescaled by 1/sqrt(M) -- which leaves the
      // least-squares minimizer alone -- so the eta term keeps the same
      // strength relative to the residual as in the L1 branch. M is
      // refreshed from the current residual after the weights, so it lags
      // one iteration.
      const double root_m = std::sqrt(m_huber);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double ai = std::abs(r[i]);
        w[i] = ai < m_huber ? 1.0 / root_m : 1.0 / std::sqrt(ai);
      }
      m_huber = eps2 * std::max(1.0, linf(r));
    }

    std::vector<double> dq = weighted_lsq(z, r, w, p.eta, q);
    std::vector<double> qn = add(q, dq);
    if (p.constraint == Constraint::unit_simplex) {
      qn = project_to_simplex(qn);
      for (std::size_t j = 0; j < k; ++j) dq[j] = qn[j] - q[j];
    }
    ++l;
    const bool small_step = l1_norm(dq) <= eps_tol * (1.0 + l1_norm(q));
    q = std::move(qn);
    r = p.residual(q);
    check_finite(r, "irls");
    z = p.jacobian(q);

    // reweighting slows to a crawl near degenerate vertices; hand the
    // endgame to exact exchanges
    bool stagnated = false;
    if (can_exchange && l % 10 == 0) {
      const double obj = l1_norm(r);
      stagnated = l >= 30 && obj >= obj_window * (1.0 - 1e-4);
      obj_window = obj;
    }

    if (small_step || stagnated) {
      if (can_exchange && l < cap) {
        bool optimal = false;
        l += exchange_descent(z, q, r, cap - l, &optimal);
        converged = small_step || optimal;
      } else {
        converged = small_step;
      }
      break;
    }
    if (l >= cap) break;
  }

  MinimizeReport rep;
  rep.q = std::move(q);
  if (rule == WeightRule::l1) {
    rep.objective = l1_norm(r);
  } else {
    rep.objective = 0.0;
    for (double ri : r) rep.objective += huber_value(ri, m_huber);
  }
  rep.iterations = l;
  rep.converged = converged;
  rep.weights_floor_hits = floor_hits;
  return rep;
}

}  // namespace

MinimizeReport irls_l1(const MinimizeProblem& p, std::span<const double> q0,
                       double eps_tol) {
  return irls_loop(p, q0, eps_tol, WeightRule::l1, 0.0);
}

MinimizeReport irls_huber(const MinimizeProblem& p, std::span<const double> q0,
                          double eps_tol, const HuberParams& hp) {
  if (!(hp.eps2 > 0.0)) throw std::invalid_argument("irls_huber: eps2 must be positive");
  return irls_loop(p, q0, eps_tol, WeightRule::huber, hp.eps2);
}

MinimizeReport l2_min(const MinimizeProblem& p, std::span<const double> q0,
                      double eps_tol) {
  if (!(eps_tol > 0.0)) throw std::invalid_argument("l2_min: eps_tol must be positive");
  const std::size_t k = p.k;
  std::vector<double> q(q0.begin(), q0.end());

  auto objective = [&](std::span<const double> qq, std::span<const double> rr) {
    double f = 0.0;
    for (double ri : rr) f += ri * ri;
    double qn2 = 0.0;
    for (double qi : qq) qn2 += qi * qi;
    return 0.5 * f + 0.5 * p.eta * qn2;
  };

  std::vector<double> r = p.residual(q);
  check_finite(r, "l2_min");
  Matrix z = p.jacobian(q);
  double f = objective(q, r);

  int l = 0;
  bool converged = false;
  while (l < 200) {
    // Gauss-Newton direction from (Z^T Z + eta I) d = -(Z^T r + eta q)
    std::vector<double> g = mat_tvec(z, r);
    for (std::size_t j = 0; j < k; ++j) g[j] += p.eta * q[j];
    Matrix h(k, k);
    for (std::size_t a = 0; a < k; ++a) {
      auto ca = z.col(a);
      for (std::size_t b = a; b < k; ++b) {
        auto cb = z.col(b);
        double s = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) s += ca[i] * cb[i];
        h(a, b) = s;
        h(b, a) = s;
      }
      h(a, a) += p.eta;
    }
    std::vector<double> d, rhs(k);
    for (std::size_t j = 0; j < k; ++j) rhs[j] = -g[j];
    if (!cholesky_solve(std::move(h), std::move(rhs), d))
      throw solver_error("l2_min: singular Gauss-Newton system");

    double gd = 0.0;
    for (std::size_t j = 0; j < k; ++j) gd += g[j] * d[j];

    double alpha = 1.0;
    std::vector<double> qn, rn;
    double fn = 0.0;
    bool accepted = false;
    for (int halve = 0; halve <= 30; ++halve) {
      qn = q;
      for (std::size_t j = 0; j < k; ++j) qn[j] += alpha * d[j];
      rn = p.residual(qn);
      check_finite(rn, "l2_min");
      fn = objective(qn, rn);
      if (fn <= f + 1e-4 * alpha * gd) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw solver_error("l2_min: line search stagnated after 30 halvings");

    std::vector<double> dq(k);
    for (std::size_t j = 0; j < k; ++j) dq[j] = alpha * d[j];
    const bool small_step = l1_norm(dq) <= eps_tol * (1.0 + l1_norm(q));
    q = std::move(qn);
    r = std::move(rn);
    z = p.jacobian(q);
    f = fn;
    ++l;
    if (small_step) {
      converged = true;
      break;
    }
  }

  MinimizeReport rep;
  rep.q = std::move(q);
  rep.objective = f;
  rep.iterations = l;
  rep.converged = converged;
  return rep;
}

MinimizeReport galerkin_solve(const MinimizeProblem& p, std::span<const double> q0,
                              double eps_tol) {
  if (!(eps_tol > 0.0)) throw std::invalid_argument("galerkin_solve: eps_tol must be positive");
  if (p.basis.rows() == 0) throw std::invalid_argument("galerkin_solve: basis missing");
  const std::size_t k = p.k;
  std::vector<double> q(q0.begin(), q0.end());

  auto reduced = [&](std::span<const double> qq) {
    auto r = p.residual(qq);
    check_finite(r, "galerkin_solve");
    return mat_tvec(p.basis, r);
  };

  std::vector<double> g = reduced(q);
  double gnorm = 0.0;
  for (double gi : g) gnorm += gi * gi;
  gnorm = std::sqrt(gnorm);

  int l = 0;
  bool converged = false;
  while (l < 100) {
    Matrix z = p.jacobian(q);
    // reduced Jacobian V^T Z, generally nonsymmetric
    Matrix jr(k, k);
    for (std::size_t b = 0; b < k; ++b) {
      auto zc = z.col(b);
      for (std::size_t a = 0; a < k; ++a) {
        auto va = p.basis.col(a);
        double s = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) s += va[i] * zc[i];
        jr(a, b) = s;
      }
    }
    std::vector<double> d, rhs(k);
    for (std::size_t j = 0; j < k; ++j) rhs[j] = -g[j];
    if (!lu_solve(std::move(jr), std::move(rhs), d))
      throw solver_error("galerkin_solve: singular reduced Jacobian");

    double alpha = 1.0;
    std::vector<double> qn, gn;
    double gnnorm = 0.0;
    bool accepted = false;
    for (int halve = 0; halve <= 30; ++halve) {
      qn = q;
      for (std::size_t j = 0; j < k; ++j) qn[j] += alpha * d[j];
      gn = reduced(qn);
      gnnorm = 0.0;
      for (double gi : gn) gnnorm += gi * gi;
      gnnorm = std::sqrt(gnnorm);
      if (gnnorm < gnorm || gnorm == 0.0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++l;
    if (!accepted) break;  // stagnation reported through converged = false

    std::vector<double> dq(k);
    for (std::size_t j = 0; j < k; ++j) dq[j] = alpha * d[j];
    const bool small_step = l1_norm(dq) <= eps_tol * (1.0 + l1_norm(q));
    q = std::move(qn);
    g = std::move(gn);
    gnorm = gnnorm;
    if (small_step) {
      converged = true;
      break;
    }
  }

  MinimizeReport rep;
  rep.q = std::move(q);
  rep.objective = gnorm;
  rep.iterations = l;
  rep.converged = converged;
  return rep;
}

}  // namespace l1rom
