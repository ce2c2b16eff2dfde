#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "l1rom/dictionary.hpp"
#include "l1rom/hdm.hpp"
#include "l1rom/minimize.hpp"

namespace l1rom {

enum class RomMethod { galerkin, l2, l1_lp, l1_irls, huber_irls };

std::string to_string(RomMethod m);
RomMethod rom_method_from_string(const std::string& s);

struct RomConfig {
  RomMethod method = RomMethod::l1_irls;
  Constraint constraint = Constraint::none;
  double eta = 1e-8;
  double eps_tol = 1e-4;
  std::optional<double> local_window;
  /// Relative perturbation applied to fitting bases whose numerical rank is
  /// deficient; 0 disables. Reconstruction always uses the clean columns.
  double perturb_eps = 1e-9;
  std::uint64_t seed = 0;
  std::size_t lp_n_cap = 5000;
};

struct RomStep {
  /// One coefficient vector per fitted block (one entry, or three for the
  /// per-variable Euler strategy).
  std::vector<std::vector<double>> coords;
  std::vector<MinimizeReport> reports;
  /// L1 norm of the fitting residual, dx-weighted.
  double projection_residual = 0.0;
};

struct RomTrajectory {
  std::vector<double> times;
  std::vector<GridField> reconstructed;
  std::vector<RomStep> steps;
};

struct ReducedSolution {
  MinimizeReport report;
  GridField reconstruction;
  BasisMatrix basis;  // the clean basis the coefficients refer to
};

/// Steady ROM with a linear residual r(w) = A w + b.
ReducedSolution rom_solve_steady(const Dictionary& d, const AdvectionSystem& sys,
                                 const RomConfig& cfg,
                                 const std::optional<Tau>& tau_star = std::nullopt);

/// Steady ROM with a general residual; the reduced Jacobian is formed by
/// central differences along basis columns.
ReducedSolution rom_solve_steady(
    const Dictionary& d,
    const std::function<std::vector<double>(std::span<const double>)>& residual_w,
    const RomConfig& cfg, const std::optional<Tau>& tau_star = std::nullopt);

/// One unsteady step: minimizes || dx (V q - S(w_n)) || in the configured
/// sense over the time-(n+1) basis and returns coefficients plus the clean
/// reconstruction.
std::pair<std::vector<double>, GridField> rom_step_unsteady(const Dictionary& d,
                                                            const GridField& w_rom_n,
                                                            std::size_t n,
                                                            const SchemeConfig& scheme,
                                                            const RomConfig& cfg,
                                                            RomStep* diag = nullptr);

/// Drives rom_step_unsteady over the dictionary's time grid, starting from
/// the projection of w0 onto the time-0 basis. The loop is self-closing:
/// each step re-enters through its own reconstruction.
RomTrajectory rom_solve_unsteady(const Dictionary& d, const GridField& w0,
                                 const SchemeConfig& scheme, const RomConfig& cfg,
                                 std::optional<double> t_final = std::nullopt);

/// Euler strategy A: one coefficient vector per step, fitted on the density
/// block only and applied to all three conserved variables.
RomTrajectory euler_rom_single_expansion(const Dictionary& d, const RomConfig& cfg,
                                         double mu_star, double t_final,
                                         double gamma = 1.4);

/// Euler strategy B: three independent fits per step, one per conserved
/// variable.
RomTrajectory euler_rom_per_variable(const Dictionary& d, const RomConfig& cfg,
                                     double mu_star, double t_final,
                                     double gamma = 1.4);

struct ErrorBoundReport {
  bool passed = false;
  double worst_margin = 0.0;  // min over steps of (bound - lhs)
  std::size_t worst_step = 0;
  std::vector<double> lhs;
  std::vector<double> bound;
  bool simplex_form = false;
};

/// Checks the monotone-scheme estimate along a scalar ROM trajectory:
/// per-step projection residual against min_mu ||w0* - w0(mu)||_1 + n*eps
/// (eps accounting for basis perturbation), or, in the simplex form,
/// ||w_rom^n - truth^n||_1 against max_mu ||w0* - w0(mu)||_1. Norms are
/// dx-weighted L1 on both sides.
ErrorBoundReport check_error_bound(const Dictionary& d, const GridField& w0_target,
                                   const RomTrajectory& traj, const SchemeConfig& scheme,
                                   double perturb_eps, bool simplex_form,
                                   const Trajectory* truth = nullptr);

}  // namespace l1rom
