#include "l1rom/rom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace l1rom {

std::string to_string(RomMethod m) {
  switch (m) {
    case RomMethod::galerkin: return "galerkin";
    case RomMethod::l2: return "l2";
    case RomMethod::l1_lp: return "l1_lp";
    case RomMethod::l1_irls: return "l1_irls";
    case RomMethod::huber_irls: return "huber_irls";
  }
  return "?";
}

RomMethod rom_method_from_string(const std::string& s) {
  if (s == "galerkin") return RomMethod::galerkin;
  if (s == "l2") return RomMethod::l2;
  if (s == "l1_lp") return RomMethod::l1_lp;
  if (s == "l1_irls") return RomMethod::l1_irls;
  if (s == "huber_irls") return RomMethod::huber_irls;
  throw std::invalid_argument("unknown ROM method '" + s + "'");
}

namespace {

std::vector<double> uniform_q0(std::size_t k) {
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

/// Fitting basis: the clean columns, perturbed when the rank condition
/// fails and perturbation is enabled.
Matrix fit_basis(const BasisMatrix& clean, const RomConfig& cfg, bool* was_perturbed) {
  if (was_perturbed) *was_perturbed = false;
  if (cfg.perturb_eps > 0.0 && numerical_rank(clean) < clean.k()) {
    if (was_perturbed) *was_perturbed = true;
    return perturb(clean, cfg.perturb_eps, cfg.seed).columns;
  }
  return clean.columns;
}

MinimizeReport run_method(const Matrix& a_eff, const std::vector<double>& b,
                          const RomConfig& cfg) {
  const std::size_t k = a_eff.cols();
  const std::vector<double> q0 = uniform_q0(k);
  switch (cfg.method) {
    case RomMethod::l1_lp:
      return l1_min_lp(a_eff, b, cfg.constraint, cfg.lp_n_cap);
    case RomMethod::l1_irls: {
      MinimizeProblem p = linear_problem(a_eff, b, cfg.eta, cfg.constraint);
      return irls_l1(p, q0, cfg.eps_tol);
    }
    case RomMethod::huber_irls: {
      MinimizeProblem p = linear_problem(a_eff, b, cfg.eta, cfg.constraint);
      return irls_huber(p, q0, cfg.eps_tol);
    }
    case RomMethod::l2: {
      MinimizeProblem p = linear_problem(a_eff, b, cfg.eta, cfg.constraint);
      return l2_min(p, q0, cfg.eps_tol);
    }
    case RomMethod::galerkin: {
      MinimizeProblem p = linear_problem(a_eff, b, cfg.eta, cfg.constraint);
      return galerkin_solve(p, q0, cfg.eps_tol);
    }
  }
  throw std::invalid_argument("run_method: bad method");
}

GridField reconstruct(const Grid1D& grid, std::size_t n_components, const Matrix& v,
                      std::span<const double> q) {
  return GridField(grid, mat_vec(v, q), n_components);
}

Dictionary localized(const Dictionary& d, const RomConfig& cfg,
                     const std::optional<Tau>& tau_star) {
  if (cfg.local_window && tau_star) return select_local(d, *tau_star, *cfg.local_window);
  return d;
}

}  // namespace

ReducedSolution rom_solve_steady(const Dictionary& d, const AdvectionSystem& sys,
                                 const RomConfig& cfg, const std::optional<Tau>& tau_star) {
  const Dictionary local = localized(d, cfg, tau_star);
  ReducedSolution out;
  out.basis = basis_at_time(local, 0);
  const Matrix vfit = fit_basis(out.basis, cfg, nullptr);
  const Matrix a_eff = sys.apply_to(vfit);

  if (cfg.method == RomMethod::galerkin) {
    MinimizeProblem p = linear_problem(a_eff, sys.b, cfg.eta, cfg.constraint);
    p.basis = vfit;
    out.report = galerkin_solve(p, uniform_q0(p.k), cfg.eps_tol);
  } else {
    out.report = run_method(a_eff, sys.b, cfg);
  }
  out.reconstruction = reconstruct(local.grid, local.n_components, out.basis.columns,
                                   out.report.q);
  return out;
}

ReducedSolution rom_solve_steady(
    const Dictionary& d,
    const std::function<std::vector<double>(std::span<const double>)>& residual_w,
    const RomConfig& cfg, const std::optional<Tau>& tau_star) {
  if (cfg.method == RomMethod::l1_lp)
    throw std::invalid_argument("rom_solve_steady: the LP backend needs a linear residual");

  const Dictionary local = localized(d, cfg, tau_star);
  ReducedSolution out;
  out.basis = basis_at_time(local, 0);
  const Matrix vfit = fit_basis(out.basis, cfg, nullptr);
  const std::size_t k = vfit.cols();

  MinimizeProblem p;
  p.k = k;
  p.eta = cfg.eta;
  p.constraint = cfg.constraint;
  p.basis = vfit;
  p.residual = [&vfit, &residual_w](std::span<const double> q) {
    return residual_w(mat_vec(vfit, q));
  };
  p.jacobian = [&vfit, &residual_w](std::span<const double> q) {
    // central differences along the basis columns
    const std::vector<double> w = mat_vec(vfit, q);
    double wmax = 0.0;
    for (double x : w) wmax = std::max(wmax, std::abs(x));
    Matrix z(vfit.rows() == 0 ? 0 : residual_w(w).size(), vfit.cols());
    std::vector<double> wp(w.size()), wm(w.size());
    for (std::size_t j = 0; j < vfit.cols(); ++j) {
      auto vj = vfit.col(j);
      double vmax = 0.0;
      for (double x : vj) vmax = std::max(vmax, std::abs(x));
      const double h = 1e-6 * std::max(1.0, wmax) / std::max(1.0, vmax);
      for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] = w[i] + h * vj[i];
        wm[i] = w[i] - h * vj[i];
      }
      const std::vector<double> rp = residual_w(wp);
      const std::vector<double> rm = residual_w(wm);
      auto dst = z.col(j);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (rp[i] - rm[i]) / (2.0 * h);
    }
    return z;
  };

  switch (cfg.method) {
    case RomMethod::l1_irls:
      out.report = irls_l1(p, uniform_q0(k), cfg.eps_tol);
      break;
    case RomMethod::huber_irls:
      out.report = irls_huber(p, uniform_q0(k), cfg.eps_tol);
      break;
    case RomMethod::l2:
      out.report = l2_min(p, uniform_q0(k), cfg.eps_tol);
      break;
    case RomMethod::galerkin:
      out.report = galerkin_solve(p, uniform_q0(k), cfg.eps_tol);
      break;
    default:
      throw std::invalid_argument("rom_solve_steady: bad method");
  }
  out.reconstruction = reconstruct(local.grid, local.n_components, out.basis.columns,
                                   out.report.q);
  return out;
}

namespace {

/// Explicit update that halves the step when a reconstruction's local wave
/// speeds overrun the shared time grid's bound; the substeps compose to the
/// same dt.
GridField step_with_substeps(const GridField& w, const SchemeConfig& scheme, double dt) {
  for (std::size_t splits = 1; splits <= 64; splits *= 2) {
    try {
      SchemeConfig s = scheme;
      s.dt = dt / static_cast<double>(splits);
      GridField out = w;
      for (std::size_t j = 0; j < splits; ++j) out = explicit_step(out, s);
      return out;
    } catch (const cfl_error&) {
      if (splits == 64) throw;
    }
  }
  throw solver_error("step_with_substeps: unreachable");
}

/// Fit of || dx (V q - target) || in the configured sense; returns the
/// report plus the dx-weighted L1 distance of the clean reconstruction.
MinimizeReport fit_target(const Matrix& vclean, const Matrix& vfit,
                          std::span<const double> target, double dx, const RomConfig& cfg,
                          std::vector<double>* recon, double* residual_l1) {
  const std::size_t n = vfit.rows();
  Matrix a_eff(n, vfit.cols());
  for (std::size_t j = 0; j < vfit.cols(); ++j) {
    auto src = vfit.col(j);
    auto dst = a_eff.col(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = dx * src[i];
  }
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = -dx * target[i];

  MinimizeReport rep;
  if (cfg.method == RomMethod::galerkin) {
    MinimizeProblem p = linear_problem(std::move(a_eff), std::move(b), cfg.eta,
                                       cfg.constraint);
    p.basis = vfit;
    rep = galerkin_solve(p, uniform_q0(vfit.cols()), cfg.eps_tol);
  } else {
    rep = run_method(a_eff, b, cfg);
  }

  if (recon) {
    *recon = mat_vec(vclean, rep.q);
    if (residual_l1) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::abs((*recon)[i] - target[i]);
      *residual_l1 = dx * s;
    }
  }
  return rep;
}

}  // namespace

std::pair<std::vector<double>, GridField> rom_step_unsteady(const Dictionary& d,
                                                            const GridField& w_rom_n,
                                                            std::size_t n,
                                                            const SchemeConfig& scheme,
                                                            const RomConfig& cfg,
                                                            RomStep* diag) {
  if (n + 1 >= d.time_grid.size())
    throw std::out_of_range("rom_step_unsteady: no basis at time n+1");
  const GridField target =
      step_with_substeps(w_rom_n, scheme, d.time_grid[n + 1] - d.time_grid[n]);

  const BasisMatrix basis = basis_at_time(d, n + 1);
  const Matrix vfit = fit_basis(basis, cfg, nullptr);

  std::vector<double> recon;
  double res_l1 = 0.0;
  MinimizeReport rep = fit_target(basis.columns, vfit, target.values, d.grid.dx(), cfg,
                                  &recon, &res_l1);
  GridField w(d.grid, std::move(recon), d.n_components);
  if (diag) {
    diag->coords = {rep.q};
    diag->reports = {rep};
    diag->projection_residual = res_l1;
  }
  return {std::move(rep.q), std::move(w)};
}

RomTrajectory rom_solve_unsteady(const Dictionary& d, const GridField& w0,
                                 const SchemeConfig& scheme, const RomConfig& cfg,
                                 std::optional<double> t_final) {
  if (!(w0.grid == d.grid) || w0.n_components != d.n_components)
    throw std::invalid_argument("rom_solve_unsteady: w0 not on the dictionary grid");

  std::size_t last = d.time_grid.size() - 1;
  if (t_final)
    while (last > 0 && d.time_grid[last] > *t_final + 1e-12) --last;

  RomTrajectory traj;
  traj.times.assign(d.time_grid.begin(), d.time_grid.begin() + last + 1);

  // initial reduced state: projection of w0 onto the time-0 basis
  const BasisMatrix b0 = basis_at_time(d, 0);
  const Matrix v0fit = fit_basis(b0, cfg, nullptr);
  RomStep step0;
  std::vector<double> recon;
  double res_l1 = 0.0;
  MinimizeReport rep0 = fit_target(b0.columns, v0fit, w0.values, d.grid.dx(), cfg, &recon,
                                   &res_l1);
  step0.coords = {rep0.q};
  step0.reports = {rep0};
  step0.projection_residual = res_l1;
  traj.steps.push_back(std::move(step0));
  traj.reconstructed.emplace_back(d.grid, std::move(recon), d.n_components);

  for (std::size_t n = 0; n < last; ++n) {
    RomStep step;
    auto [q, w] = rom_step_unsteady(d, traj.reconstructed.back(), n, scheme, cfg, &step);
    traj.steps.push_back(std::move(step));
    traj.reconstructed.push_back(std::move(w));
  }
  return traj;
}

namespace {

/// Independent per-variable fits can leave thin pockets of negative
/// pressure or spurious velocity spikes between waves; the marching copy is
/// repaired there (energy lifted, velocity clamped to the marching bound)
/// so the next flux evaluation stays physical. Returns the repaired cells.
std::size_t euler_positivity_repair(GridField& w, double gamma, double speed_cap) {
  const std::size_t n = w.grid.n_cells;
  double rho_max = 0.0, p_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rho_max = std::max(rho_max, w.at(0, i));
    const double p =
        (gamma - 1.0) * (w.at(2, i) - 0.5 * w.at(1, i) * w.at(1, i) / std::max(w.at(0, i), 1e-300));
    p_max = std::max(p_max, p);
  }
  const double rho_floor = 1e-6 * std::max(rho_max, 1e-300);
  const double p_floor = 1e-6 * std::max(p_max, 1e-300);
  std::size_t repaired = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool touched = false;
    if (w.at(0, i) < rho_floor) {
      // near-vacuum fit artifact: flooring the density alone would
      // manufacture a huge velocity out of the leftover momentum
      w.at(0, i) = rho_floor;
      w.at(1, i) = 0.0;
      w.at(2, i) = p_floor / (gamma - 1.0);
      touched = true;
    }
    const double kinetic = 0.5 * w.at(1, i) * w.at(1, i) / w.at(0, i);
    double p = (gamma - 1.0) * (w.at(2, i) - kinetic);
    if (p < p_floor) {
      w.at(2, i) = kinetic + p_floor / (gamma - 1.0);
      p = p_floor;
      touched = true;
    }
    if (speed_cap > 0.0) {
      const double c = std::sqrt(gamma * p / w.at(0, i));
      const double u = w.at(1, i) / w.at(0, i);
      if (std::abs(u) + c > speed_cap) {
        const double u_new = (u >= 0.0 ? 1.0 : -1.0) * std::max(0.0, 0.95 * speed_cap - c);
        w.at(1, i) = w.at(0, i) * u_new;
        w.at(2, i) = p / (gamma - 1.0) + 0.5 * w.at(0, i) * u_new * u_new;
        touched = true;
      }
    }
    if (touched) ++repaired;
  }
  return repaired;
}


RomTrajectory euler_rom(const Dictionary& d, const RomConfig& cfg, double mu_star,
                        double t_final, double gamma, bool per_variable) {
  if (d.n_components != 3)
    throw std::invalid_argument("euler_rom: needs a 3-component dictionary");
  SchemeConfig scheme;
  scheme.flux_id = FluxId::rusanov_euler;
  scheme.gamma = gamma;
  scheme.cfl = 1.0;  // dt comes from the dictionary grid; 1.0 is the hard bound

  std::size_t last = d.time_grid.size() - 1;
  while (last > 0 && d.time_grid[last] > t_final + 1e-12) --last;

  const std::size_t nc = d.grid.n_cells;
  const double dx = d.grid.dx();
  const std::vector<std::size_t> fit_components =
      per_variable ? std::vector<std::size_t>{0, 1, 2} : std::vector<std::size_t>{0};

  RomTrajectory traj;
  traj.times.assign(d.time_grid.begin(), d.time_grid.begin() + last + 1);

  GridField current = euler_initial(mu_star, d.grid, gamma);
  for (std::size_t n = 0; n <= last; ++n) {
    const GridField target =
        n == 0 ? current
               : step_with_substeps(current, scheme, d.time_grid[n] - d.time_grid[n - 1]);

    RomStep step;
    GridField w(d.grid, 3);
    double res_total = 0.0;
    for (std::size_t c : fit_components) {
      const BasisMatrix bc = basis_at_time(d, n, c);
      const Matrix vfit = fit_basis(bc, cfg, nullptr);
      std::vector<double> recon;
      double res_l1 = 0.0;
      MinimizeReport rep = fit_target(bc.columns, vfit, target.component(c), dx, cfg,
                                      &recon, &res_l1);
      res_total += res_l1;
      step.coords.push_back(rep.q);
      step.reports.push_back(std::move(rep));
      if (per_variable) {
        std::copy(recon.begin(), recon.end(), w.component(c).begin());
      } else {
        // strategy A: the density coefficients drive all three variables
        for (std::size_t comp = 0; comp < 3; ++comp) {
          const BasisMatrix bfull = basis_at_time(d, n, comp);
          const std::vector<double> rc = mat_vec(bfull.columns, step.coords[0]);
          std::copy(rc.begin(), rc.end(), w.component(comp).begin());
        }
      }
    }
    if (!per_variable) {
      // residual across all variables of the single-expansion state
      res_total = 0.0;
      for (std::size_t comp = 0; comp < 3; ++comp) {
        auto wc = w.component(comp);
        auto tc = target.component(comp);
        for (std::size_t i = 0; i < nc; ++i) res_total += dx * std::abs(wc[i] - tc[i]);
      }
    }
    step.projection_residual = res_total;
    traj.steps.push_back(std::move(step));
    traj.reconstructed.push_back(w);
    // the recorded state stays the raw basis combination; the loop re-enters
    // through a physically admissible copy
    const double dt_next = n < last ? d.time_grid[n + 1] - d.time_grid[n] : 0.0;
    euler_positivity_repair(w, gamma, dt_next > 0.0 ? 0.95 * dx / dt_next : 0.0);
    current = std::move(w);
  }
  return traj;
}

}  // namespace

RomTrajectory euler_rom_single_expansion(const Dictionary& d, const RomConfig& cfg,
                                         double mu_star, double t_final, double gamma) {
  return euler_rom(d, cfg, mu_star, t_final, gamma, false);
}

RomTrajectory euler_rom_per_variable(const Dictionary& d, const RomConfig& cfg,
                                     double mu_star, double t_final, double gamma) {
  return euler_rom(d, cfg, mu_star, t_final, gamma, true);
}

ErrorBoundReport check_error_bound(const Dictionary& d, const GridField& w0_target,
                                   const RomTrajectory& traj, const SchemeConfig& scheme,
                                   double perturb_eps, bool simplex_form,
                                   const Trajectory* truth) {
  const double dx = d.grid.dx();
  auto weighted_l1 = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return dx * s;
  };

  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (const auto& e : d.entries) {
    const double dist = weighted_l1(w0_target.values, e.states.front().values);
    dmin = std::min(dmin, dist);
    dmax = std::max(dmax, dist);
  }

  // perturbation slack per step (the remark's n * eps term)
  double eps_step = 0.0;
  if (perturb_eps > 0.0) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : d.entries)
      for (const auto& s : e.states)
        for (double v : s.values) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
    double qmax = 1.0;
    for (const auto& st : traj.steps)
      for (const auto& qv : st.coords) qmax = std::max(qmax, l1_norm(qv));
    eps_step = perturb_eps * (hi - lo) * dx * static_cast<double>(w0_target.size()) * qmax;
  }

  ErrorBoundReport rep;
  rep.simplex_form = simplex_form;
  rep.passed = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  const std::size_t n_states = traj.reconstructed.size();
  for (std::size_t i = 0; i < n_states; ++i) {
    double lhs = 0.0;
    if (simplex_form) {
      if (!truth || truth->states.size() < n_states)
        throw std::invalid_argument("check_error_bound: simplex form needs the truth");
      lhs = weighted_l1(traj.reconstructed[i].values, truth->states[i].values);
    } else if (i == 0) {
      lhs = weighted_l1(traj.reconstructed[0].values, w0_target.values);
    } else {
      SchemeConfig s = scheme;
      s.dt = traj.times[i] - traj.times[i - 1];
      const GridField stepped = explicit_step(traj.reconstructed[i - 1], s);
      lhs = weighted_l1(traj.reconstructed[i].values, stepped.values);
    }
    const double bound =
        (simplex_form ? dmax : dmin) + static_cast<double>(i) * eps_step;
    rep.lhs.push_back(lhs);
    rep.bound.push_back(bound);
    const double margin = bound - lhs;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_step = i;
    }
    if (lhs > bound + 1e-9 * (1.0 + bound)) rep.passed = false;
  }
  return rep;
}

}  // namespace l1rom
