#include "l1rom/hdm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace l1rom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Nozzle reservoir state and the pressure unit behind the mu parameter.
constexpr double kNozzleP0 = 1.0;
constexpr double kNozzleRho0 = 1.0;
constexpr double kNozzlePref = 0.4;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double advection_source(double x, double mu, double k) {
  // 2k e / (1 + e)^2 with e = exp(-2k|x - mu|): same value as the sigmoid
  // form but exactly symmetric about mu and free of overflow.
  const double e = std::exp(-2.0 * k * std::abs(x - mu));
  const double d = 1.0 + e;
  return 2.0 * k * e / (d * d);
}

GridField solve_advection_steady(const AdvectionProblem& p) {
  if (!(p.k > 0.0)) throw std::invalid_argument("advection: k must be positive");
  Grid1D grid(0.0, 1.0, p.n_cells, false);
  GridField u(grid, 1);
  const double dx = grid.dx();
  double prev = p.u_left;
  for (std::size_t i = 0; i < p.n_cells; ++i) {
    prev -= dx * advection_source(grid.center(i), p.mu, p.k);
    u.values[i] = prev;
  }
  return u;
}

std::vector<double> AdvectionSystem::residual(std::span<const double> w) const {
  if (w.size() != n) throw std::invalid_argument("AdvectionSystem: size mismatch");
  std::vector<double> r(n);
  r[0] = w[0] + b[0];
  for (std::size_t i = 1; i < n; ++i) r[i] = w[i] - w[i - 1] + b[i];
  return r;
}

Matrix AdvectionSystem::apply_to(const Matrix& v) const {
  if (v.rows() != n) throw std::invalid_argument("AdvectionSystem: size mismatch");
  Matrix out(n, v.cols());
  for (std::size_t j = 0; j < v.cols(); ++j) {
    auto src = v.col(j);
    auto dst = out.col(j);
    dst[0] = src[0];
    for (std::size_t i = 1; i < n; ++i) dst[i] = src[i] - src[i - 1];
  }
  return out;
}

Matrix AdvectionSystem::dense() const {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    if (i > 0) a(i, i - 1) = -1.0;
  }
  return a;
}

AdvectionSystem assemble_advection_system(const AdvectionProblem& p) {
  Grid1D grid(0.0, 1.0, p.n_cells, false);
  AdvectionSystem sys;
  sys.n = p.n_cells;
  sys.dx = grid.dx();
  sys.b.resize(p.n_cells);
  for (std::size_t i = 0; i < p.n_cells; ++i)
    sys.b[i] = sys.dx * advection_source(grid.center(i), p.mu, p.k);
  sys.b[0] -= p.u_left;
  return sys;
}

double godunov_flux_burgers(double a, double b) {
  const auto f = [](double u) { return 0.5 * u * u; };
  return std::max(f(std::max(a, 0.0)), f(std::min(b, 0.0)));
}

double pressure(double rho, double momentum, double energy, double gamma) {
  if (!(rho > 0.0)) throw solver_error("pressure: nonpositive density");
  return (gamma - 1.0) * (energy - 0.5 * momentum * momentum / rho);
}

std::array<double, 3> euler_physical_flux(const std::array<double, 3>& u, double gamma) {
  const double rho = u[0], m = u[1], e = u[2];
  const double vel = m / rho;
  const double p = pressure(rho, m, e, gamma);
  return {m, m * vel + p, vel * (e + p)};
}

std::array<double, 3> rusanov_flux_euler(const std::array<double, 3>& ul,
                                         const std::array<double, 3>& ur, double gamma) {
  const double pl = pressure(ul[0], ul[1], ul[2], gamma);
  const double pr = pressure(ur[0], ur[1], ur[2], gamma);
  if (!(pl > 0.0) || !(pr > 0.0)) throw solver_error("rusanov: nonpositive pressure");
  const double cl = std::sqrt(gamma * pl / ul[0]);
  const double cr = std::sqrt(gamma * pr / ur[0]);
  const double s = std::max(std::abs(ul[1] / ul[0]) + cl, std::abs(ur[1] / ur[0]) + cr);
  const auto fl = euler_physical_flux(ul, gamma);
  const auto fr = euler_physical_flux(ur, gamma);
  std::array<double, 3> out;
  for (int c = 0; c < 3; ++c)
    out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * s * (ur[c] - ul[c]);
  return out;
}

namespace {

double scalar_flux(FluxId id, double a, double b) {
  switch (id) {
    case FluxId::godunov_burgers:
      return godunov_flux_burgers(a, b);
    case FluxId::upwind_advection:
      return -b;  // wave speed -1, upwind from the right
    default:
      throw std::invalid_argument("scalar_flux: not a scalar flux");
  }
}

// One-sided partials of the scalar fluxes; at kinks either side works for
// the damped Newton below.
std::pair<double, double> scalar_flux_partials(FluxId id, double a, double b) {
  if (id == FluxId::upwind_advection) return {0.0, -1.0};
  const auto f = [](double u) { return 0.5 * u * u; };
  const double fa = f(std::max(a, 0.0)), fb = f(std::min(b, 0.0));
  double da = 0.0, db = 0.0;
  if (fa >= fb && a > 0.0) da = a;
  if (fb > fa && b < 0.0) db = b;
  return {da, db};
}

double scalar_max_speed(FluxId id, std::span<const double> u) {
  return id == FluxId::upwind_advection ? 1.0 : max_abs(u);
}

double euler_max_speed(const GridField& w, double gamma) {
  double s = 0.0;
  const std::size_t n = w.grid.n_cells;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = w.at(0, i), m = w.at(1, i), e = w.at(2, i);
    const double p = pressure(rho, m, e, gamma);
    if (!(p > 0.0)) throw solver_error("euler: nonpositive pressure");
    s = std::max(s, std::abs(m / rho) + std::sqrt(gamma * p / rho));
  }
  return s;
}

double pick_dt(const SchemeConfig& scheme, double dx, double smax) {
  const double admissible = scheme.cfl * dx / std::max(smax, 1e-300);
  if (!scheme.dt) return admissible;
  if (*scheme.dt * smax > scheme.cfl * dx * (1.0 + 1e-12))
    throw cfl_error("explicit_step: dt violates the CFL bound", admissible);
  return *scheme.dt;
}

}  // namespace

GridField explicit_step(const GridField& w, const SchemeConfig& scheme) {
  const std::size_t n = w.grid.n_cells;
  const double dx = w.grid.dx();
  GridField out = w;

  if (scheme.flux_id == FluxId::rusanov_euler) {
    if (w.n_components != 3)
      throw std::invalid_argument("explicit_step: euler flux needs 3 components");
    const double smax = euler_max_speed(w, scheme.gamma);
    const double lambda = pick_dt(scheme, dx, smax) / dx;
    auto cell = [&](std::size_t i) -> std::array<double, 3> {
      return {w.at(0, i), w.at(1, i), w.at(2, i)};
    };
    auto at = [&](long i) -> std::array<double, 3> {
      if (w.grid.periodic) return cell((i + static_cast<long>(n)) % static_cast<long>(n));
      return cell(static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1)));
    };
    std::array<double, 3> left = rusanov_flux_euler(at(-1), at(0), scheme.gamma);
    for (std::size_t i = 0; i < n; ++i) {
      const auto right = rusanov_flux_euler(at(static_cast<long>(i)),
                                            at(static_cast<long>(i) + 1), scheme.gamma);
      for (std::size_t c = 0; c < 3; ++c)
        out.at(c, i) = w.at(c, i) - lambda * (right[c] - left[c]);
      left = right;
    }
    return out;
  }

  if (w.n_components != 1)
    throw std::invalid_argument("explicit_step: scalar flux needs 1 component");
  auto u = w.component(0);
  const double smax = scalar_max_speed(scheme.flux_id, u);
  const double lambda = pick_dt(scheme, dx, smax) / dx;
  auto at = [&](long i) -> double {
    if (w.grid.periodic) return u[(i + static_cast<long>(n)) % static_cast<long>(n)];
    return u[static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1))];
  };
  double left = scalar_flux(scheme.flux_id, at(-1), at(0));
  for (std::size_t i = 0; i < n; ++i) {
    const double right =
        scalar_flux(scheme.flux_id, at(static_cast<long>(i)), at(static_cast<long>(i) + 1));
    out.values[i] = u[i] - lambda * (right - left);
    left = right;
  }
  return out;
}

GridField implicit_step(const GridField& w, const SchemeConfig& scheme) {
  if (w.n_components != 1)
    throw std::invalid_argument("implicit_step: scalar problems only");
  const std::size_t n = w.grid.n_cells;
  const double dx = w.grid.dx();
  auto u = w.component(0);
  const double lambda =
      (scheme.dt ? *scheme.dt : scheme.cfl * dx / std::max(scalar_max_speed(scheme.flux_id, u), 1e-300)) /
      dx;
  const bool periodic = w.grid.periodic;

  auto at = [&](std::span<const double> v, long i) -> double {
    if (periodic) return v[(i + static_cast<long>(n)) % static_cast<long>(n)];
    return v[static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1))];
  };
  auto residual = [&](std::span<const double> v, std::vector<double>& g) {
    for (std::size_t i = 0; i < n; ++i) {
      const double fr =
          scalar_flux(scheme.flux_id, at(v, static_cast<long>(i)), at(v, static_cast<long>(i) + 1));
      const double fl =
          scalar_flux(scheme.flux_id, at(v, static_cast<long>(i) - 1), at(v, static_cast<long>(i)));
      g[i] = v[i] - u[i] + lambda * (fr - fl);
    }
  };

  std::vector<double> v(u.begin(), u.end());
  std::vector<double> g(n), gn(n);
  const double target = 1e-10 * std::max(max_abs(u), 1e-300);

  residual(v, g);
  for (int iter = 0; iter < 100; ++iter) {
    if (max_abs(g) <= target) {
      GridField out = w;
      out.values = v;
      return out;
    }
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const long li = static_cast<long>(i);
      const auto [ra, rb] = scalar_flux_partials(scheme.flux_id, at(v, li), at(v, li + 1));
      const auto [la, lb] = scalar_flux_partials(scheme.flux_id, at(v, li - 1), at(v, li));
      diag[i] = 1.0 + lambda * (ra - lb);
      upper[i] = lambda * rb;
      lower[i] = -lambda * la;
      if (!periodic) {
        // transmissive ghosts track the edge cells
        if (i == 0) diag[i] += lower[i], lower[i] = 0.0;
        if (i + 1 == n) diag[i] += upper[i], upper[i] = 0.0;
      }
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
    std::vector<double> d = tridiagonal_solve(lower, diag, upper, rhs, periodic);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> vn(n);
    for (int halve = 0; halve < 40; ++halve) {
      for (std::size_t i = 0; i < n; ++i) vn[i] = v[i] + alpha * d[i];
      residual(vn, gn);
      if (max_abs(gn) < max_abs(g)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw solver_error("implicit_step: Newton stalled");
    v.swap(vn);
    g.swap(gn);
  }
  throw solver_error("implicit_step: no convergence within 100 Newton iterations");
}

GridField burgers_initial(double mu, const Grid1D& grid) {
  GridField u(grid, 1);
  for (std::size_t i = 0; i < grid.n_cells; ++i)
    u.values[i] = mu * std::abs(std::sin(2.0 * grid.center(i))) + 0.1;
  return u;
}

std::pair<double, std::size_t> shared_time_step(double dx, double speed_cap, double cfl,
                                                double t_final) {
  const double dt_max = cfl * dx / speed_cap;
  const auto n = static_cast<std::size_t>(std::ceil(t_final / dt_max - 1e-12));
  return {t_final / static_cast<double>(std::max<std::size_t>(n, 1)), std::max<std::size_t>(n, 1)};
}

Trajectory solve_burgers(const BurgersProblem& p) {
  Grid1D grid(0.0, kTwoPi, p.n_cells, true);
  const auto [dt, n_steps] = shared_time_step(grid.dx(), p.u_cap, p.cfl, p.t_final);
  SchemeConfig scheme;
  scheme.flux_id = FluxId::godunov_burgers;
  scheme.cfl = p.cfl;
  scheme.dt = dt;
  scheme.t_final = p.t_final;

  Trajectory traj;
  traj.mu = {p.mu};
  traj.scheme_id = "burgers_godunov";
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  GridField u = burgers_initial(p.mu, grid);
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    u = explicit_step(u, scheme);
    traj.times.push_back(static_cast<double>(s) * dt);
    traj.states.push_back(u);
  }
  return traj;
}

GridField euler_initial(double mu, const Grid1D& grid, double gamma) {
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("euler_initial: mu must be in [0,1]");
  GridField u(grid, 3);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const bool left = grid.center(i) <= 0.5;
    const double rho_sod = left ? 1.0 : 0.125;
    const double p_sod = left ? 1.0 : 0.1;
    const double rho_lax = left ? 0.445 : 0.5;
    const double u_lax = left ? 0.698 : 0.0;
    const double p_lax = left ? 3.528 : 0.571;
    const double rho = mu * rho_sod + (1.0 - mu) * rho_lax;
    const double vel = (1.0 - mu) * u_lax;  // Sod is at rest
    const double p = mu * p_sod + (1.0 - mu) * p_lax;
    u.at(0, i) = rho;
    u.at(1, i) = rho * vel;
    u.at(2, i) = p / (gamma - 1.0) + 0.5 * rho * vel * vel;
  }
  return u;
}

Trajectory solve_euler(const EulerProblem& p) {
  Grid1D grid(0.0, 1.0, p.n_cells, false);
  double cap = p.wave_speed_cap;
  if (cap <= 0.0) {
    // Worst initial wave speed over the blend range, with headroom for the
    // interaction transients, so every mu shares one time grid.
    for (int j = 0; j <= 20; ++j) {
      const GridField u0 = euler_initial(static_cast<double>(j) / 20.0, grid, p.gamma);
      cap = std::max(cap, euler_max_speed(u0, p.gamma));
    }
    cap *= 1.25;
  }
  const auto [dt, n_steps] = shared_time_step(grid.dx(), cap, p.cfl, p.t_final);

  SchemeConfig scheme;
  scheme.flux_id = FluxId::rusanov_euler;
  scheme.gamma = p.gamma;
  scheme.cfl = p.cfl;
  scheme.dt = dt;
  scheme.t_final = p.t_final;

  Trajectory traj;
  traj.mu = {p.mu};
  traj.scheme_id = "euler_rusanov";
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  GridField u = euler_initial(p.mu, grid, p.gamma);
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    u = explicit_step(u, scheme);
    traj.times.push_back(static_cast<double>(s) * dt);
    traj.states.push_back(u);
  }
  return traj;
}

std::pair<double, double> nozzle_area(double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("nozzle_area: x outside [0,1]");
  const double d = x - 0.5;
  if (x <= 0.5) return {1.0 + 6.0 * d * d, 12.0 * d};
  return {1.0 + 0.15 * d * d + 6.0 * d * d * d, 0.3 * d + 18.0 * d * d};
}

namespace {

struct NozzleGhosts {
  std::array<double, 3> inlet;
  std::array<double, 3> outlet;
};

NozzleGhosts nozzle_ghosts(const GridField& w, const NozzleProblem& p) {
  const double gamma = p.gamma;
  const double a0sq = gamma * kNozzleP0 / kNozzleRho0;
  const std::size_t n = w.grid.n_cells;

  // Inlet: velocity extrapolated from the interior, density and pressure
  // from the reservoir by the isentropic relations.
  double u_in = std::max(w.at(1, 0) / w.at(0, 0), 0.0);
  double theta = 1.0 - 0.5 * (gamma - 1.0) * u_in * u_in / a0sq;
  theta = std::max(theta, 0.01);
  const double rho_in = kNozzleRho0 * std::pow(theta, 1.0 / (gamma - 1.0));
  const double p_in = kNozzleP0 * std::pow(theta, gamma / (gamma - 1.0));

  // Outlet: static pressure pinned at mu * p_ref while the flow is
  // subsonic; full extrapolation otherwise.
  const double rho_e = w.at(0, n - 1);
  const double u_e = w.at(1, n - 1) / rho_e;
  const double p_e = pressure(rho_e, w.at(1, n - 1), w.at(2, n - 1), gamma);
  const double c_e = std::sqrt(gamma * p_e / rho_e);
  double p_out = p.mu * kNozzlePref;
  if (u_e >= c_e) p_out = p_e;

  NozzleGhosts g;
  g.inlet = {rho_in, rho_in * u_in, p_in / (gamma - 1.0) + 0.5 * rho_in * u_in * u_in};
  g.outlet = {rho_e, rho_e * u_e, p_out / (gamma - 1.0) + 0.5 * rho_e * u_e * u_e};
  return g;
}

}  // namespace

std::vector<double> nozzle_residual(const GridField& w, const NozzleProblem& p) {
  const std::size_t n = w.grid.n_cells;
  const double dx = w.grid.dx();
  const double gamma = p.gamma;
  const NozzleGhosts ghosts = nozzle_ghosts(w, p);

  auto cell = [&](long i) -> std::array<double, 3> {
    if (i < 0) return ghosts.inlet;
    if (i >= static_cast<long>(n)) return ghosts.outlet;
    const auto ui = static_cast<std::size_t>(i);
    return {w.at(0, ui), w.at(1, ui), w.at(2, ui)};
  };
  auto face_area = [&](std::size_t face) {
    const double x = w.grid.x_min + static_cast<double>(face) * dx;
    return nozzle_area(std::clamp(x, 0.0, 1.0)).first;
  };

  std::vector<double> r(3 * n, 0.0);
  std::array<double, 3> left = rusanov_flux_euler(cell(-1), cell(0), gamma);
  double a_left = face_area(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto right =
        rusanov_flux_euler(cell(static_cast<long>(i)), cell(static_cast<long>(i) + 1), gamma);
    const double a_right = face_area(i + 1);
    const double p_i = pressure(w.at(0, i), w.at(1, i), w.at(2, i), gamma);
    const double a_i = nozzle_area(w.grid.center(i)).first;
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      if (c == 1) s = p_i * (a_right - a_left) / dx;
      r[c * n + i] = (-(a_right * right[c] - a_left * left[c]) / dx + s) / a_i;
    }
    left = right;
    a_left = a_right;
  }
  return r;
}

std::vector<double> nozzle_mach(const GridField& w, double gamma) {
  const std::size_t n = w.grid.n_cells;
  std::vector<double> mach(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = w.at(0, i);
    const double u = w.at(1, i) / rho;
    const double p = pressure(rho, w.at(1, i), w.at(2, i), gamma);
    mach[i] = std::abs(u) / std::sqrt(gamma * p / rho);
  }
  return mach;
}

GridField nozzle_initial_guess(const NozzleProblem& p) {
  Grid1D grid(0.0, 1.0, p.n_cells, false);
  GridField w(grid, 3);
  // mildly moving subsonic start; the boundary treatment pulls the march
  // toward the right branch
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double rho = 0.9 * kNozzleRho0;
    const double u = 0.3;
    const double pr = 0.9 * kNozzleP0;
    w.at(0, i) = rho;
    w.at(1, i) = rho * u;
    w.at(2, i) = pr / (p.gamma - 1.0) + 0.5 * rho * u * u;
  }
  return w;
}

GridField solve_nozzle_steady(const NozzleProblem& p) {
  if (!(p.mu > 0.0)) throw std::invalid_argument("nozzle: mu must be positive");
  Grid1D grid(0.0, 1.0, p.n_cells, false);
  const double gamma = p.gamma;
  GridField w = nozzle_initial_guess(p);

  const double dx = grid.dx();
  double r0 = -1.0;
  for (std::size_t iter = 0; iter < p.max_iters; ++iter) {
    const std::vector<double> r = nozzle_residual(w, p);
    const double rnorm = l1_norm(std::span<const double>(r));
    if (r0 < 0.0) r0 = rnorm;
    if (rnorm <= p.residual_drop * r0) return w;

    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double rho = w.at(0, i);
      const double u = w.at(1, i) / rho;
      const double pr = pressure(rho, w.at(1, i), w.at(2, i), gamma);
      const double c = std::sqrt(gamma * pr / rho);
      const double dt = p.cfl * dx / (std::abs(u) + c);
      for (std::size_t comp = 0; comp < 3; ++comp)
        w.at(comp, i) += dt * r[comp * grid.n_cells + i];
    }
  }
  const double final_res = l1_norm(std::span<const double>(nozzle_residual(w, p)));
  throw solver_error("solve_nozzle_steady: no steady state within " +
                     std::to_string(p.max_iters) + " iterations (residual " +
                     std::to_string(final_res) + ")");
}

}  // namespace l1rom
