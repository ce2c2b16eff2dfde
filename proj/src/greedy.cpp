#include "l1rom/greedy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace l1rom {

double error_indicator(const Dictionary& d, const AdvectionSystem& sys,
                       const RomConfig& cfg) {
  const ReducedSolution sol = rom_solve_steady(d, sys, cfg);
  return l1_norm(std::span<const double>(sys.residual(sol.reconstruction.values)));
}

double error_indicator(const Dictionary& d, const GridField& w0,
                       const SchemeConfig& scheme, const RomConfig& cfg) {
  const RomTrajectory traj = rom_solve_unsteady(d, w0, scheme, cfg);
  double total = 0.0;
  for (const auto& step : traj.steps) total += step.projection_residual;
  return total;
}

namespace {

bool already_selected(const std::vector<std::vector<double>>& selected,
                      const std::vector<double>& mu) {
  return std::find(selected.begin(), selected.end(), mu) != selected.end();
}

void evaluate_candidates(const GreedyConfig& cfg, const GreedyDriver& driver,
                         const Dictionary& dict, std::vector<double>& indicators,
                         std::vector<double>& errors) {
  const std::size_t nc = cfg.candidates.size();
  indicators.assign(nc, 0.0);
  errors.assign(nc, 0.0);
  const bool with_error = static_cast<bool>(driver.true_error);

  auto work = [&](std::size_t c) {
    indicators[c] = driver.indicator(dict, cfg.candidates[c]);
    if (with_error) errors[c] = driver.true_error(dict, cfg.candidates[c]);
  };

  if (cfg.threads <= 1 || nc < 2) {
    for (std::size_t c = 0; c < nc; ++c) work(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(cfg.threads, nc);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < nc; c = next.fetch_add(1)) work(c);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::pair<Dictionary, GreedyHistory> greedy_sample(const GreedyConfig& cfg,
                                                   const GreedyDriver& driver) {
  if (cfg.candidates.empty()) throw std::invalid_argument("greedy_sample: no candidates");
  if (!already_selected(cfg.candidates, cfg.mu0))
    throw std::invalid_argument("greedy_sample: mu0 must be a candidate");

  GreedyHistory hist;
  std::vector<Trajectory> entries;
  entries.push_back(driver.hdm_solve(cfg.mu0));
  hist.selected.push_back(cfg.mu0);
  Dictionary dict = build_dictionary(entries);

  std::vector<double> indicators, errors;
  const bool with_error = static_cast<bool>(driver.true_error);

  auto record = [&]() -> double {
    evaluate_candidates(cfg, driver, dict, indicators, errors);
    double imax = 0.0;
    for (std::size_t c = 0; c < cfg.candidates.size(); ++c) {
      if (already_selected(hist.selected, cfg.candidates[c])) continue;
      imax = std::max(imax, indicators[c]);
    }
    hist.indicator_max.push_back(imax);
    hist.indicator_table.push_back(indicators);
    if (with_error) {
      double emax = 0.0, esum = 0.0;
      for (double e : errors) {
        emax = std::max(emax, e);
        esum += e;
      }
      hist.error_max.push_back(emax);
      hist.error_mean.push_back(esum / static_cast<double>(errors.size()));
      hist.error_table.push_back(errors);
    }
    return imax;
  };

  double imax = record();
  while (hist.selected.size() < cfg.max_samples + 1 && imax > cfg.eps_stop) {
    // argmax over candidates not yet selected; strict comparison keeps ties
    // at the lowest index
    std::size_t pick = cfg.candidates.size();
    double best = -1.0;
    for (std::size_t c = 0; c < cfg.candidates.size(); ++c) {
      if (already_selected(hist.selected, cfg.candidates[c])) continue;
      if (indicators[c] > best) {
        best = indicators[c];
        pick = c;
      }
    }
    if (pick == cfg.candidates.size()) break;  // every candidate selected

    entries.push_back(driver.hdm_solve(cfg.candidates[pick]));
    hist.selected.push_back(cfg.candidates[pick]);
    dict = build_dictionary(entries);
    imax = record();
  }
  return {std::move(dict), std::move(hist)};
}

GreedyDriver make_advection_greedy_driver(const AdvectionProblem& base,
                                          const RomConfig& rom_cfg) {
  GreedyDriver driver;
  driver.hdm_solve = [base](const std::vector<double>& mu) {
    AdvectionProblem p = base;
    p.mu = mu.at(0);
    Trajectory traj;
    traj.mu = mu;
    traj.times = {0.0};
    traj.states = {solve_advection_steady(p)};
    traj.scheme_id = "advection_upwind";
    return traj;
  };
  driver.indicator = [base, rom_cfg](const Dictionary& d, const std::vector<double>& mu) {
    AdvectionProblem p = base;
    p.mu = mu.at(0);
    return error_indicator(d, assemble_advection_system(p), rom_cfg);
  };
  driver.true_error = [base, rom_cfg](const Dictionary& d, const std::vector<double>& mu) {
    AdvectionProblem p = base;
    p.mu = mu.at(0);
    const ReducedSolution sol = rom_solve_steady(d, assemble_advection_system(p), rom_cfg);
    return relative_l2_error(sol.reconstruction, solve_advection_steady(p));
  };
  return driver;
}

}  // namespace l1rom
