#pragma once

#include <functional>

#include "l1rom/core.hpp"
#include "l1rom/linalg.hpp"

namespace l1rom {

enum class Constraint { none, unit_simplex };

/// Residual and Jacobian evaluators handed to any minimizer. residual maps
/// coefficients q to r(Vq); jacobian maps q to Z = J(Vq) V. The basis itself
/// is carried for the Galerkin path, which contracts against V directly.
struct MinimizeProblem {
  std::function<std::vector<double>(std::span<const double>)> residual;
  std::function<Matrix(std::span<const double>)> jacobian;
  Matrix basis;  // may stay empty for pure residual-minimization methods
  std::size_t k = 0;
  double eta = 1e-8;
  Constraint constraint = Constraint::none;
  /// Set when the residual is affine in q; lets the L1 path finish with
  /// exact vertex exchanges.
  bool linear = false;
};

/// Linear residual r(q) = a_eff q + b packaged as a MinimizeProblem.
MinimizeProblem linear_problem(Matrix a_eff, std::vector<double> b, double eta = 1e-8,
                               Constraint constraint = Constraint::none);

struct MinimizeReport {
  std::vector<double> q;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int weights_floor_hits = 0;
};

struct HuberParams {
  double eps2 = 1e-6;
};

/// x^2 below the breakpoint, M(2|x| - M) above; C1 across |x| = M.
double huber_value(double x, double m);

/// Minimizer of ||diag(w)(Z dq + r)||_2^2 + eta ||q_current + dq||_2^2 via
/// the k x k normal equations. Throws solver_error on a rank-deficient
/// system when eta = 0.
std::vector<double> weighted_lsq(const Matrix& z, std::span<const double> r,
                                 std::span<const double> w, double eta,
                                 std::span<const double> q_current);

/// Exact L1 minimizer of ||a_eff q + b||_1 as a linear program (variables
/// q, s, t; equality a_eff q + b - s + t = 0), solved by a dense primal
/// simplex with Bland's rule. The small-scale reference oracle for the IRLS
/// paths. unit_simplex adds 1^T q = 1, q >= 0 exactly.
MinimizeReport l1_min_lp(const Matrix& a_eff, std::span<const double> b,
                         Constraint constraint = Constraint::none,
                         std::size_t n_cap = 5000);

/// L1 minimization by iteratively reweighted least squares. Weights are
/// |r_i|^{-1/2} floored at delta = 1e-10 * max(1, ||r||_inf); floor hits are
/// counted in the report. Stops when ||dq||_1 <= eps_tol (1 + ||q||_1),
/// capped at 200 iterations. Reweighted steps converge only linearly near
/// degenerate optima, so on linear unconstrained problems the loop finishes
/// with exact vertex exchanges (dual test plus weighted-median line search)
/// once the steps stagnate; exchanges are counted as iterations.
MinimizeReport irls_l1(const MinimizeProblem& p, std::span<const double> q0,
                       double eps_tol);

/// Huber-function minimization by IRLS. The reweighted normal equations of
/// the Huber functional want weight^2 proportional to 1 below M and M/|r_i|
/// above; the vector is rescaled by 1/sqrt(M), which leaves each subproblem
/// minimizer alone but keeps eta meaningful, giving weights 1/sqrt(M) and
/// |r_i|^{-1/2}. M = eps2 * max(1, ||r||_inf) lags one iteration behind the
/// residual.
MinimizeReport irls_huber(const MinimizeProblem& p, std::span<const double> q0,
                          double eps_tol, const HuberParams& hp = {});

/// Gauss-Newton on 1/2 ||r||_2^2 + 1/2 eta ||q||_2^2 with a backtracking
/// (Armijo) line search.
MinimizeReport l2_min(const MinimizeProblem& p, std::span<const double> q0,
                      double eps_tol);

/// Damped Newton on the k-dimensional system V^T r(Vq) = 0.
MinimizeReport galerkin_solve(const MinimizeProblem& p, std::span<const double> q0,
                              double eps_tol);

}  // namespace l1rom
