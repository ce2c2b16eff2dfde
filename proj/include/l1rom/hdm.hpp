#pragma once

#include <array>
#include <optional>
#include <utility>

#include "l1rom/core.hpp"
#include "l1rom/linalg.hpp"

namespace l1rom {

enum class FluxId { godunov_burgers, rusanov_euler, upwind_advection };

struct SchemeConfig {
  double cfl = 0.9;
  std::optional<double> dt;  // fixed step; derived from cfl when absent
  double t_final = 1.0;
  FluxId flux_id = FluxId::godunov_burgers;
  double gamma = 1.4;  // rusanov_euler only
};

/// Steady advection with a moving-layer source, u(0) = u_left.
struct AdvectionProblem {
  double mu = 0.4;
  double k = 100.0;
  std::size_t n_cells = 1000;
  double u_left = 1.0;
};

/// Periodic Burgers on [0, 2*pi], u0 = mu*|sin(2x)| + 0.1.
struct BurgersProblem {
  double mu = 0.5;
  std::size_t n_cells = 400;
  double t_final = 3.141592653589793;
  double cfl = 0.9;
  /// Amplitude bound used to fix one dt for the whole parameter range, so
  /// trajectories of different mu share a time grid.
  double u_cap = 1.1;
};

/// Sod/Lax blend Riemann problem on [0, 1].
struct EulerProblem {
  double mu = 1.0;
  double gamma = 1.4;
  std::size_t n_cells = 1000;
  double t_final = 0.16;
  double cfl = 0.9;
  /// Wave-speed bound for the shared dt; 0 means scan the blend range.
  double wave_speed_cap = 0.0;
};

/// Transonic Laval nozzle, parameterized by the outlet static pressure
/// p_out = mu * p_ref with p_ref = 0.4 * p0 (stagnation p0 = 1, rho0 = 1).
struct NozzleProblem {
  double mu = 1.5;
  double gamma = 1.4;
  std::size_t n_cells = 200;
  double cfl = 0.5;
  double residual_drop = 1e-8;
  std::size_t max_iters = 400000;
};

/// Source f(x; mu) = 2k exp(-2k(x-mu)) / (1 + exp(-2k(x-mu)))^2, evaluated
/// through the sigmoid to stay finite for large |x - mu|.
double advection_source(double x, double mu, double k);

GridField solve_advection_steady(const AdvectionProblem& p);

/// Affine residual r(w) = A w + b of the steady upwind discretization.
/// A is lower bidiagonal (unit diagonal, -1 subdiagonal) and kept implicit;
/// dense() materializes it for small-scale checks.
struct AdvectionSystem {
  std::size_t n = 0;
  double dx = 0.0;
  std::vector<double> b;

  std::vector<double> residual(std::span<const double> w) const;
  /// A * v for an N x k block of columns.
  Matrix apply_to(const Matrix& v) const;
  Matrix dense() const;
};
AdvectionSystem assemble_advection_system(const AdvectionProblem& p);

double godunov_flux_burgers(double a, double b);

double pressure(double rho, double momentum, double energy, double gamma);
std::array<double, 3> euler_physical_flux(const std::array<double, 3>& u, double gamma);
std::array<double, 3> rusanov_flux_euler(const std::array<double, 3>& ul,
                                         const std::array<double, 3>& ur, double gamma);

/// One forward-Euler finite-volume update. Periodic or transmissive
/// boundaries follow the grid flag. Throws cfl_error when dt violates the
/// configured bound, carrying the admissible step.
GridField explicit_step(const GridField& w, const SchemeConfig& scheme);

/// Backward-Euler update for the scalar fluxes, solved by damped Newton to
/// residual <= 1e-10 * ||u||_inf.
GridField implicit_step(const GridField& w, const SchemeConfig& scheme);

GridField burgers_initial(double mu, const Grid1D& grid);
Trajectory solve_burgers(const BurgersProblem& p);

/// Conservative (rho, rho u, E) blend of the Sod and Lax data; the blend is
/// taken on primitive variables and converted through the equation of state.
GridField euler_initial(double mu, const Grid1D& grid, double gamma = 1.4);
Trajectory solve_euler(const EulerProblem& p);

/// Nozzle area and its derivative; continuous at the throat x = 1/2.
std::pair<double, double> nozzle_area(double x);

/// Start state of the pseudo-time march, exposed so relative residual drops
/// can be reproduced.
GridField nozzle_initial_guess(const NozzleProblem& p);

GridField solve_nozzle_steady(const NozzleProblem& p);

/// Steady quasi-1D residual of the nozzle scheme (length 3N), used both by
/// the pseudo-time march and as the ROM residual.
std::vector<double> nozzle_residual(const GridField& w, const NozzleProblem& p);

/// Mach number profile from a conservative nozzle state.
std::vector<double> nozzle_mach(const GridField& w, double gamma);

/// Shared time step for a family of explicit trajectories: the largest dt
/// with dt/dx * speed_cap <= cfl, shrunk so n_steps * dt lands on t_final.
std::pair<double, std::size_t> shared_time_step(double dx, double speed_cap, double cfl,
                                                double t_final);

}  // namespace l1rom
