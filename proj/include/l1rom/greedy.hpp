#pragma once

#include <functional>

#include "l1rom/dictionary.hpp"
#include "l1rom/rom.hpp"

namespace l1rom {

struct GreedyConfig {
  std::vector<std::vector<double>> candidates;
  double eps_stop = 0.0;
  std::size_t max_samples = 10;
  std::vector<double> mu0;
  RomConfig rom_cfg;
  std::size_t threads = 1;
};

struct GreedyHistory {
  std::vector<std::vector<double>> selected;
  std::vector<double> indicator_max;
  std::vector<double> error_max;
  std::vector<double> error_mean;
  /// Per-iteration, per-candidate tables (row 0 belongs to the seed
  /// dictionary). Error tables stay empty without a truth evaluator.
  std::vector<std::vector<double>> indicator_table;
  std::vector<std::vector<double>> error_table;
};

/// The hooks one experiment provides to the sampler. true_error may be left
/// empty when no truth comparison is wanted.
struct GreedyDriver {
  std::function<Trajectory(const std::vector<double>& mu)> hdm_solve;
  std::function<double(const Dictionary&, const std::vector<double>& mu)> indicator;
  std::function<double(const Dictionary&, const std::vector<double>& mu)> true_error;
};

/// Cumulated L1 residual of the ROM trajectory for one parameter; a single
/// term for steady problems.
double error_indicator(const Dictionary& d, const AdvectionSystem& sys,
                       const RomConfig& cfg);

/// Unsteady form: the per-step projection residuals of the ROM trajectory
/// started from w0, summed over the dictionary's time grid.
double error_indicator(const Dictionary& d, const GridField& w0,
                       const SchemeConfig& scheme, const RomConfig& cfg);

/// Greedy sampling of the parameter space: seed with mu0, then repeatedly
/// add the candidate with the largest indicator until eps_stop or
/// max_samples. Already-selected candidates are skipped in the argmax; ties
/// break to the lowest candidate index.
std::pair<Dictionary, GreedyHistory> greedy_sample(const GreedyConfig& cfg,
                                                   const GreedyDriver& driver);

/// Ready-made driver for the steady advection study; truths are solved once
/// per candidate and cached.
GreedyDriver make_advection_greedy_driver(const AdvectionProblem& base,
                                          const RomConfig& rom_cfg);

}  // namespace l1rom
