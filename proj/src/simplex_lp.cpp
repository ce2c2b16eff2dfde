#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "l1rom/minimize.hpp"
#include "l1rom/rng.hpp"

namespace l1rom {

namespace {

// Row-major tableau for a standard-form LP (all variables >= 0, equality
// rows). Row m holds the reduced costs, column n_vars the rhs/objective.
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n_vars)
      : m_(m), width_(n_vars + 1), n_vars_(n_vars), data_((m + 1) * (n_vars + 1), 0.0),
        basis_(m, 0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * width_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * width_; }

  std::size_t rows() const { return m_; }
  std::size_t vars() const { return n_vars_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = row(pr);
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == pr) continue;
      double* ri = row(i);
      const double f = ri[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) ri[j] -= f * prow[j];
      ri[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t m_, width_, n_vars_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

}  // namespace

MinimizeReport l1_min_lp(const Matrix& a_eff, std::span<const double> b,
                         Constraint constraint, std::size_t n_cap) {
  const std::size_t n = a_eff.rows(), k = a_eff.cols();
  if (b.size() != n) throw std::invalid_argument("l1_min_lp: shape mismatch");
  if (n > n_cap)
    throw solver_error("l1_min_lp: residual dimension " + std::to_string(n) +
                       " exceeds the configured cap " + std::to_string(n_cap) +
                       "; use an IRLS method instead");

  const bool simplex = constraint == Constraint::unit_simplex;
  // Unconstrained: x = [q+ (k), q- (k), s (n), t (n)].
  // unit_simplex:  x = [q  (k),        s (n), t (n)] plus the row 1^T q = 1.
  const std::size_t nq = simplex ? k : 2 * k;
  const std::size_t n_vars = nq + 2 * n;
  const std::size_t m = n + (simplex ? 1 : 0);
  const std::size_t s0 = nq, t0 = nq + n;

  Tableau tab(m, n_vars);

  // Deterministic hair-thin rhs perturbation. The residual data of these
  // problems spans many orders of magnitude, and unperturbed vertices are so
  // degenerate that the ratio test crawls through near-zero steps; the bias
  // this adds to the optimum is ~1e-13 of the data scale.
  double bscale = 0.0;
  for (double x : b) bscale = std::max(bscale, std::abs(x));
  Rng pert_rng(0x9e3779b97f4a7c15ull);
  const double pert_amp = 1e-13 * std::max(1.0, bscale);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      tab.at(i, j) = a_eff(i, j);
      if (!simplex) tab.at(i, k + j) = -a_eff(i, j);
    }
    tab.at(i, s0 + i) = -1.0;
    tab.at(i, t0 + i) = 1.0;
    tab.at(i, n_vars) = -b[i] + (2.0 * pert_rng.uniform() - 1.0) * pert_amp;
  }
  if (simplex) {
    for (std::size_t j = 0; j < k; ++j) tab.at(n, j) = 1.0;
    tab.at(n, n_vars) = 1.0;
    // Start from q_0 = 1: eliminate column 0 against the simplex row, which
    // gives a feasible basis without a phase-1 problem.
    for (std::size_t i = 0; i < n; ++i) {
      const double f = tab.at(i, 0);
      if (f != 0.0)
        for (std::size_t j = 0; j <= n_vars; ++j) tab.at(i, j) -= f * tab.at(n, j);
    }
    tab.basis()[n] = 0;
  }

  // Make every rhs nonnegative and pick s_i or t_i as the basic variable.
  for (std::size_t i = 0; i < n; ++i) {
    if (tab.at(i, n_vars) < 0.0)
      for (std::size_t j = 0; j <= n_vars; ++j) tab.at(i, j) = -tab.at(i, j);
    tab.basis()[i] = tab.at(i, s0 + i) > 0.0 ? s0 + i : t0 + i;
  }

  // Reduced-cost row for cost = sum(s) + sum(t): r_j = c_j - sum of rows
  // whose basic variable is an s or t.
  for (std::size_t j = s0; j < n_vars; ++j) tab.at(m, j) = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] >= s0) {
      for (std::size_t j = 0; j <= n_vars; ++j) tab.at(m, j) -= tab.at(i, j);
    }
  }

  std::vector<char> is_basic(n_vars, 0);
  for (std::size_t i = 0; i < m; ++i) is_basic[tab.basis()[i]] = 1;

  double obj0 = 0.0;
  for (std::size_t i = 0; i < m; ++i) obj0 += tab.at(i, n_vars);
  const double eps_cost = 1e-11 * std::max(1.0, obj0);
  // a reduced cost this negative with no pivotable row is a real ray, not
  // accumulated pivot noise
  const double eps_unbounded = 1e-6 * std::max(1.0, obj0);

  // Pivots are only taken on entries that carry weight within their column;
  // dividing a row by a noise-level entry would poison the whole tableau.
  auto ratio_test = [&](std::size_t j) -> std::size_t {
    double colmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) colmax = std::max(colmax, tab.at(i, j));
    if (colmax <= 0.0) return m;
    const double eps_piv = 1e-9 * colmax;
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double aij = tab.at(i, j);
      if (aij > eps_piv) {
        const double ratio = tab.at(i, n_vars) / aij;
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 &&
             (leave == m || tab.basis()[i] < tab.basis()[leave]))) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
    }
    return leave;
  };

  // Dantzig pricing by default; Bland's lowest-index rule takes over while
  // the objective stalls on a degenerate stretch, which is what guarantees
  // termination. Ratio ties always break to the lowest basic index.
  const std::size_t max_pivots = 2000 + 100 * (m + n_vars);
  const std::size_t bland_after = 40;
  std::size_t pivots = 0, degenerate_streak = 0;

  while (true) {
    std::size_t enter = n_vars, leave = m;
    if (degenerate_streak < bland_after) {
      double best = -eps_cost;
      for (std::size_t j = 0; j < n_vars; ++j) {
        if (!is_basic[j] && tab.at(m, j) < best) {
          best = tab.at(m, j);
          enter = j;
        }
      }
      if (enter != n_vars) {
        leave = ratio_test(enter);
        if (leave == m) {
          degenerate_streak = bland_after;  // let the Bland scan decide
          enter = n_vars;
        }
      }
    }
    if (enter == n_vars && degenerate_streak >= bland_after) {
      for (std::size_t j = 0; j < n_vars && leave == m; ++j) {
        if (is_basic[j] || tab.at(m, j) >= -eps_cost) continue;
        leave = ratio_test(j);
        if (leave == m) {
          if (tab.at(m, j) < -eps_unbounded)
            throw solver_error("l1_min_lp: unbounded linear program");
          continue;
        }
        enter = j;
      }
    }
    if (enter == n_vars) break;  // optimal

    const double before = tab.at(m, n_vars);
    is_basic[tab.basis()[leave]] = 0;
    is_basic[enter] = 1;
    tab.pivot(leave, enter);
    if (tab.at(m, n_vars) > before + 1e-12 * (1.0 + std::abs(before)))
      degenerate_streak = 0;
    else
      ++degenerate_streak;
    if (++pivots > max_pivots)
      throw solver_error("l1_min_lp: pivot limit exceeded");
  }

  MinimizeReport rep;
  rep.q.assign(k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t v = tab.basis()[i];
    const double val = tab.at(i, n_vars);
    if (v < k)
      rep.q[v] += val;
    else if (!simplex && v < 2 * k)
      rep.q[v - k] -= val;
  }
  rep.objective = -tab.at(m, n_vars);
  rep.iterations = static_cast<int>(pivots);
  rep.converged = true;
  return rep;
}

}  // namespace l1rom
