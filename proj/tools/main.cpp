#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "l1rom/analysis.hpp"
#include "l1rom/greedy.hpp"
#include "l1rom/rng.hpp"
#include "l1rom/rom.hpp"
#include "sha256.hpp"

namespace fs = std::filesystem;
using namespace l1rom;

namespace {

constexpr const char* kVersion = "l1rom 0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// key = value sections; lookups go through "section.key".
class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      line = line.substr(first, last - first + 1);
      if (line.front() == '[') {
        if (line.back() != ']')
          throw config_error("bad section header at line " + std::to_string(line_no));
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("expected key = value at line " + std::to_string(line_no));
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      values_[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  std::string str_required(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("missing config key '" + key + "'");
    return it->second;
  }
  double real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "' is not a number: " + it->second);
    }
  }
  long integer(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stol(it->second);
    } catch (const std::exception&) {
      throw config_error("config key '" + key + "' is not an integer: " + it->second);
    }
  }
  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream ss(it->second);
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) throw config_error("config key '" + key + "' is not a number list");
    return out;
  }

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Collects emitted files and phase timings, then writes manifest.txt with
/// SHA-256 digests of everything written.
class Manifest {
 public:
  Manifest(fs::path dir, std::string command, const Config& cfg, bool quiet)
      : dir_(std::move(dir)), command_(std::move(command)), cfg_(cfg), quiet_(quiet) {}

  void write_text(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    out.close();
    files_.emplace_back(name, digest::sha256_hex(content));
    if (!quiet_) std::cout << "wrote " << p.string() << "\n";
  }

  template <typename F>
  void phase(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    timings_.emplace_back(
        name, std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
  }

  void finalize() {
    std::string m = "L1ROM-MANIFEST v1\n";
    m += std::string("version = ") + kVersion + "\n";
    m += "command = " + command_ + "\n";
    for (const auto& [k, v] : cfg_.all()) m += k + " = " + v + "\n";
    for (const auto& [name, ms] : timings_)
      m += "phase." + name + ".ms = " + std::to_string(ms) + "\n";
    std::string body;
    for (const auto& [name, sha] : files_) body += "FILE " + name + " SHA256 " + sha + "\n";
    m += body;
    fs::create_directories(dir_);
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
    out << m;
    if (!quiet_) std::cout << "wrote " << (dir_ / "manifest.txt").string() << "\n";
  }

 private:
  fs::path dir_;
  std::string command_;
  const Config& cfg_;
  bool quiet_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::pair<std::string, long>> timings_;
};

RomConfig rom_config_from(const Config& cfg) {
  RomConfig rom;
  rom.method = rom_method_from_string(cfg.str("rom.method", "l1_irls"));
  const std::string c = cfg.str("rom.constraint", "none");
  if (c == "none")
    rom.constraint = Constraint::none;
  else if (c == "unit_simplex")
    rom.constraint = Constraint::unit_simplex;
  else
    throw config_error("rom.constraint must be none or unit_simplex");
  rom.eta = cfg.real("rom.eta", 1e-8);
  rom.eps_tol = cfg.real("rom.eps_tol", 1e-4);
  rom.perturb_eps = cfg.real("rom.perturb_eps", 1e-9);
  rom.seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
  rom.lp_n_cap = static_cast<std::size_t>(cfg.integer("rom.lp_n_cap", 5000));
  if (cfg.has("rom.window")) rom.local_window = cfg.real("rom.window", 0.1);
  if (!(rom.eps_tol > 0)) throw config_error("rom.eps_tol must be positive");
  return rom;
}

std::string experiment_of(const Config& cfg) {
  const std::string e = cfg.str_required("experiment.name");
  if (e != "advection" && e != "burgers" && e != "euler" && e != "nozzle")
    throw config_error("experiment.name must be advection|burgers|euler|nozzle");
  return e;
}

AdvectionProblem advection_from(const Config& cfg) {
  AdvectionProblem p;
  p.mu = cfg.real("hdm.mu", 0.4);
  p.k = cfg.real("hdm.k", 100.0);
  p.n_cells = static_cast<std::size_t>(cfg.integer("hdm.n_cells", 1000));
  p.u_left = cfg.real("hdm.u_left", 1.0);
  if (p.mu < 0.3 || p.mu > 0.5)
    throw config_error("advection hdm.mu outside the documented range [0.3, 0.5]");
  return p;
}

BurgersProblem burgers_from(const Config& cfg) {
  BurgersProblem p;
  p.mu = cfg.real("hdm.mu", 0.5);
  p.n_cells = static_cast<std::size_t>(cfg.integer("hdm.n_cells", 400));
  p.t_final = cfg.real("hdm.t_final", std::numbers::pi);
  p.cfl = cfg.real("hdm.cfl", 0.9);
  if (p.mu < 0.0 || p.mu > 1.0)
    throw config_error("burgers hdm.mu outside the documented range [0, 1]");
  return p;
}

EulerProblem euler_from(const Config& cfg) {
  EulerProblem p;
  p.mu = cfg.real("hdm.mu", 1.0);
  p.gamma = cfg.real("hdm.gamma", 1.4);
  p.n_cells = static_cast<std::size_t>(cfg.integer("hdm.n_cells", 1000));
  p.t_final = cfg.real("hdm.t_final", 0.16);
  p.cfl = cfg.real("hdm.cfl", 0.9);
  if (p.mu < 0.0 || p.mu > 1.0)
    throw config_error("euler hdm.mu outside the documented range [0, 1]");
  return p;
}

NozzleProblem nozzle_from(const Config& cfg) {
  NozzleProblem p;
  p.mu = cfg.real("hdm.mu", 1.5);
  p.gamma = cfg.real("hdm.gamma", 1.4);
  p.n_cells = static_cast<std::size_t>(cfg.integer("hdm.n_cells", 200));
  if (!(p.mu > 0)) throw config_error("nozzle hdm.mu must be positive");
  return p;
}

std::string csv_solution(const Trajectory& traj, const std::string& experiment,
                         double gamma) {
  const GridField& last = traj.states.back();
  const Grid1D& g = last.grid;
  std::string csv;
  if (experiment == "euler" || experiment == "nozzle") {
    csv = "x,rho,u,p";
    if (experiment == "nozzle") csv += ",mach";
    csv += "\n";
    const std::vector<double> mach =
        experiment == "nozzle" ? nozzle_mach(last, gamma) : std::vector<double>();
    for (std::size_t i = 0; i < g.n_cells; ++i) {
      const double rho = last.at(0, i);
      const double u = last.at(1, i) / rho;
      const double p = pressure(rho, last.at(1, i), last.at(2, i), gamma);
      csv += format_double(g.center(i)) + "," + format_double(rho) + "," +
             format_double(u) + "," + format_double(p);
      if (experiment == "nozzle") csv += "," + format_double(mach[i]);
      csv += "\n";
    }
  } else {
    csv = "x,u\n";
    for (std::size_t i = 0; i < g.n_cells; ++i)
      csv += format_double(g.center(i)) + "," + format_double(last.values[i]) + "\n";
  }
  return csv;
}

std::string dictionary_text(const Dictionary& d) {
  const fs::path tmp =
      fs::temp_directory_path() / ("l1rom_dict_" + std::to_string(::getpid()) + ".tmp");
  save_dictionary(d, tmp.string());
  std::ifstream in(tmp, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(tmp);
  return ss.str();
}

Trajectory cli_solve_hdm(const std::string& experiment, const Config& cfg) {
  if (experiment == "advection") {
    const AdvectionProblem p = advection_from(cfg);
    Trajectory t;
    t.mu = {p.mu};
    t.times = {0.0};
    t.states = {solve_advection_steady(p)};
    t.scheme_id = "advection_upwind";
    return t;
  }
  if (experiment == "burgers") return solve_burgers(burgers_from(cfg));
  if (experiment == "euler") return solve_euler(euler_from(cfg));
  const NozzleProblem p = nozzle_from(cfg);
  Trajectory t;
  t.mu = {p.mu};
  t.times = {0.0};
  t.states = {solve_nozzle_steady(p)};
  t.scheme_id = "nozzle_rusanov";
  return t;
}

// ---------------------------------------------------------------------------

int cmd_hdm(const Config& cfg, bool quiet) {
  const std::string experiment = experiment_of(cfg);
  const fs::path out_dir = cfg.str("output.dir", "out");
  Manifest manifest(out_dir, "hdm", cfg, quiet);

  Trajectory traj;
  manifest.phase("solve", [&] { traj = cli_solve_hdm(experiment, cfg); });
  manifest.phase("write", [&] {
    manifest.write_text("solution.csv",
                        csv_solution(traj, experiment, cfg.real("hdm.gamma", 1.4)));
    manifest.write_text("trajectory.dict", dictionary_text(build_dictionary({traj})));
  });
  manifest.finalize();
  return kExitOk;
}

GreedyConfig greedy_config_from(const Config& cfg) {
  GreedyConfig g;
  const double lo = cfg.real("greedy.candidates_min", 0.3);
  const double hi = cfg.real("greedy.candidates_max", 0.5);
  const long nc = cfg.integer("greedy.candidates_n", 21);
  if (nc <= 0) throw config_error("greedy.candidates_n must be positive");
  if (!(hi > lo)) throw config_error("greedy candidate range is empty");
  for (long i = 0; i < nc; ++i)
    g.candidates.push_back(
        {lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nc - 1)});
  g.mu0 = {cfg.real("greedy.mu0", 0.4)};
  g.max_samples = static_cast<std::size_t>(cfg.integer("greedy.max_samples", 10));
  g.eps_stop = cfg.real("greedy.eps_stop", 0.0);
  g.rom_cfg = rom_config_from(cfg);
  g.threads = static_cast<std::size_t>(cfg.integer("run.threads", 1));
  bool found = false;
  for (const auto& c : g.candidates) found = found || std::abs(c[0] - g.mu0[0]) < 1e-12;
  if (!found) throw config_error("greedy.mu0 must be one of the candidates");
  return g;
}

int cmd_greedy(const Config& cfg, bool quiet) {
  const std::string experiment = experiment_of(cfg);
  if (experiment != "advection")
    throw config_error("greedy sampling is wired for the advection experiment");
  const GreedyConfig gc = greedy_config_from(cfg);
  const AdvectionProblem base = advection_from(cfg);

  const fs::path out_dir = cfg.str("output.dir", "out");
  Manifest manifest(out_dir, "greedy", cfg, quiet);

  Dictionary dict;
  GreedyHistory hist;
  manifest.phase("greedy", [&] {
    auto [d, h] = greedy_sample(gc, make_advection_greedy_driver(base, gc.rom_cfg));
    dict = std::move(d);
    hist = std::move(h);
  });

  manifest.phase("write", [&] {
    manifest.write_text("dictionary.dict", dictionary_text(dict));

    std::string history = "iteration,selected_mu,max_indicator,max_error,mean_error\n";
    for (std::size_t i = 0; i < hist.selected.size(); ++i) {
      history += std::to_string(i) + "," + format_double(hist.selected[i][0]) + "," +
                 format_double(hist.indicator_max[i]) + "," +
                 format_double(hist.error_max[i]) + "," + format_double(hist.error_mean[i]) +
                 "\n";
    }
    manifest.write_text("greedy_history.csv", history);

    std::string scatter = "iteration,mu,indicator,l2_error\n";
    for (std::size_t it = 0; it < hist.indicator_table.size(); ++it)
      for (std::size_t c = 0; c < gc.candidates.size(); ++c)
        scatter += std::to_string(it) + "," + format_double(gc.candidates[c][0]) + "," +
                   format_double(hist.indicator_table[it][c]) + "," +
                   format_double(hist.error_table[it][c]) + "\n";
    manifest.write_text("indicator_vs_error.csv", scatter);
  });
  manifest.finalize();
  return kExitOk;
}

std::string coords_csv(const Dictionary& d, std::span<const double> q) {
  std::string csv = "member_mu,coefficient\n";
  for (std::size_t j = 0; j < d.size(); ++j)
    csv += format_double(d.entries[j].mu[0]) + "," + format_double(q[j]) + "\n";
  return csv;
}

int cmd_rom(const Config& cfg_in, bool quiet) {
  const std::string experiment = experiment_of(cfg_in);
  const std::string dict_path = cfg_in.str_required("dictionary.file");
  if (!fs::exists(dict_path)) {
    std::cerr << "error: dictionary file not found: " << dict_path << "\n";
    return kExitSolver;
  }
  const Dictionary dict = load_dictionary(dict_path);
  // method = all runs the whole comparison table; park a concrete method in
  // the parsed config so the shared plumbing stays happy
  const bool all_methods = cfg_in.str("rom.method", "l1_irls") == "all";
  Config cfg = cfg_in;
  if (all_methods) {
    if (experiment != "advection")
      throw config_error("rom.method = all is wired for the advection experiment");
    cfg.set("rom.method", "l1_irls");
  }
  const RomConfig rom = rom_config_from(cfg);
  const bool want_truth = cfg.integer("rom.truth", 1) != 0;

  const fs::path out_dir = cfg.str("output.dir", "out");
  Manifest manifest(out_dir, "rom", cfg, quiet);

  if (experiment == "advection") {
    AdvectionProblem p = advection_from(cfg);
    p.n_cells = dict.grid.n_cells;
    const AdvectionSystem sys = assemble_advection_system(p);
    const GridField truth = want_truth ? solve_advection_steady(p) : GridField();

    const std::vector<RomMethod> methods =
        all_methods ? std::vector<RomMethod>{RomMethod::galerkin, RomMethod::l2,
                                             RomMethod::l1_lp, RomMethod::l1_irls,
                                             RomMethod::huber_irls}
                    : std::vector<RomMethod>{rom.method};

    std::string table = "method,rel_error,objective,iterations,converged,wall_ms\n";
    for (RomMethod m : methods) {
      RomConfig mcfg = rom;
      mcfg.method = m;
      ReducedSolution sol;
      const auto t0 = std::chrono::steady_clock::now();
      manifest.phase(to_string(m), [&] { sol = rom_solve_steady(dict, sys, mcfg); });
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      const double err =
          want_truth ? relative_l2_error(sol.reconstruction, truth) : -1.0;
      table += to_string(m) + "," + format_double(err) + "," +
               format_double(sol.report.objective) + "," +
               std::to_string(sol.report.iterations) + "," +
               (sol.report.converged ? "1" : "0") + "," + std::to_string(ms) + "\n";

      const std::string suffix = all_methods ? "_" + to_string(m) : "";
      manifest.write_text("coords" + suffix + ".csv", coords_csv(dict, sol.report.q));
      std::string rec = "x,u\n";
      for (std::size_t i = 0; i < dict.grid.n_cells; ++i)
        rec += format_double(dict.grid.center(i)) + "," +
               format_double(sol.reconstruction.values[i]) + "\n";
      manifest.write_text("reconstruction" + suffix + ".csv", rec);
    }
    manifest.write_text(all_methods ? "methods.csv" : "report.csv", table);
    manifest.finalize();
    return kExitOk;
  }

  if (experiment == "burgers") {
    const double mu_star = cfg.real("hdm.mu", 0.5);
    const double t_final = cfg.real("hdm.t_final", dict.time_grid.back());
    SchemeConfig scheme;
    scheme.flux_id = FluxId::godunov_burgers;
    scheme.cfl = 1.0;

    RomTrajectory traj;
    manifest.phase("rom", [&] {
      traj = rom_solve_unsteady(dict, burgers_initial(mu_star, dict.grid), scheme, rom,
                                t_final);
    });
    double err = -1.0;
    if (want_truth) {
      BurgersProblem p = burgers_from(cfg);
      p.mu = mu_star;
      p.n_cells = dict.grid.n_cells;
      p.t_final = dict.time_grid.back();
      const Trajectory truth = solve_burgers(p);
      err = relative_l2_error(traj.reconstructed.back(),
                              truth.states[traj.reconstructed.size() - 1]);
    }
    manifest.phase("write", [&] {
      std::string rec = "x,u\n";
      const GridField& last = traj.reconstructed.back();
      for (std::size_t i = 0; i < dict.grid.n_cells; ++i)
        rec += format_double(dict.grid.center(i)) + "," + format_double(last.values[i]) +
               "\n";
      manifest.write_text("reconstruction.csv", rec);
      manifest.write_text("coords.csv", coords_csv(dict, traj.steps.back().coords[0]));
      std::string report = "method,rel_error,final_objective,steps\n";
      report += to_string(rom.method) + "," + format_double(err) + "," +
                format_double(traj.steps.back().projection_residual) + "," +
                std::to_string(traj.steps.size()) + "\n";
      manifest.write_text("report.csv", report);
    });
    manifest.finalize();
    return kExitOk;
  }

  if (experiment == "euler") {
    const double mu_star = cfg.real("hdm.mu", 0.6);
    const double gamma = cfg.real("hdm.gamma", 1.4);
    const double t_final = cfg.real("hdm.t_final", dict.time_grid.back());
    const std::string strategy = cfg.str("rom.strategy", "per_variable");
    if (strategy != "per_variable" && strategy != "single")
      throw config_error("rom.strategy must be per_variable or single");

    RomTrajectory traj;
    manifest.phase("rom", [&] {
      traj = strategy == "single"
                 ? euler_rom_single_expansion(dict, rom, mu_star, t_final, gamma)
                 : euler_rom_per_variable(dict, rom, mu_star, t_final, gamma);
    });
    double err = -1.0;
    if (want_truth) {
      EulerProblem p = euler_from(cfg);
      p.mu = mu_star;
      p.n_cells = dict.grid.n_cells;
      p.t_final = dict.time_grid.back();
      const Trajectory truth = solve_euler(p);
      err = relative_l2_error(traj.reconstructed.back(),
                              truth.states[traj.reconstructed.size() - 1]);
    }
    manifest.phase("write", [&] {
      Trajectory as_traj;
      as_traj.mu = {mu_star};
      as_traj.times = {traj.times.back()};
      as_traj.times[0] = 0.0;
      as_traj.states = {traj.reconstructed.back()};
      manifest.write_text("reconstruction.csv", csv_solution(as_traj, "euler", gamma));
      manifest.write_text("coords.csv", coords_csv(dict, traj.steps.back().coords[0]));
      std::string report = "method,strategy,rel_error,final_objective,steps\n";
      report += to_string(rom.method) + "," + strategy + "," + format_double(err) + "," +
                format_double(traj.steps.back().projection_residual) + "," +
                std::to_string(traj.steps.size()) + "\n";
      manifest.write_text("report.csv", report);
    });
    manifest.finalize();
    return kExitOk;
  }

  // nozzle: steady nonlinear residual over the dictionary
  NozzleProblem p = nozzle_from(cfg);
  p.n_cells = dict.grid.n_cells;
  ReducedSolution sol;
  manifest.phase("rom", [&] {
    sol = rom_solve_steady(
        dict, [&](std::span<const double> w) {
          GridField f(dict.grid, std::vector<double>(w.begin(), w.end()), 3);
          return nozzle_residual(f, p);
        },
        rom);
  });
  double err = -1.0;
  if (want_truth) {
    const GridField truth = solve_nozzle_steady(p);
    err = relative_l2_error(sol.reconstruction, truth);
  }
  manifest.phase("write", [&] {
    Trajectory as_traj;
    as_traj.mu = {p.mu};
    as_traj.times = {0.0};
    as_traj.states = {sol.reconstruction};
    manifest.write_text("reconstruction.csv", csv_solution(as_traj, "nozzle", p.gamma));
    manifest.write_text("coords.csv", coords_csv(dict, sol.report.q));
    std::string report = "method,rel_error,objective,iterations,converged\n";
    report += to_string(rom.method) + "," + format_double(err) + "," +
              format_double(sol.report.objective) + "," +
              std::to_string(sol.report.iterations) + "," +
              (sol.report.converged ? "1" : "0") + "\n";
    manifest.write_text("report.csv", report);
  });
  manifest.finalize();
  return kExitOk;
}

int cmd_verify(const Config& cfg, bool quiet) {
  const std::string experiment = experiment_of(cfg);
  if (experiment != "burgers")
    throw config_error("verify runs on the scalar burgers experiment");

  const double cfl = cfg.real("hdm.cfl", 0.9);
  const std::size_t n_cells = static_cast<std::size_t>(cfg.integer("hdm.n_cells", 128));
  const std::size_t n_pairs = static_cast<std::size_t>(cfg.integer("verify.pairs", 100));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));

  const fs::path out_dir = cfg.str("output.dir", "out");
  Manifest manifest(out_dir, "verify", cfg, quiet);

  Grid1D grid(0.0, 2.0 * std::numbers::pi, n_cells, true);
  SchemeConfig scheme;
  scheme.flux_id = FluxId::godunov_burgers;
  scheme.cfl = cfl;
  scheme.dt = cfl * grid.dx();  // amplitudes below are bounded by 1

  Rng rng(seed);
  std::size_t contraction_fail = 0, monotone_fail = 0;
  double worst_contraction = 0.0;
  manifest.phase("properties", [&] {
    for (std::size_t trial = 0; trial < n_pairs; ++trial) {
      GridField u(grid, 1), v(grid, 1);
      for (std::size_t i = 0; i < n_cells; ++i) {
        u.values[i] = rng.uniform(-1, 1);
        v.values[i] = rng.uniform(-1, 1);
      }
      const GridField su = explicit_step(u, scheme);
      const GridField sv = explicit_step(v, scheme);
      double before = 0, after = 0;
      for (std::size_t i = 0; i < n_cells; ++i) {
        before += std::abs(u.values[i] - v.values[i]);
        after += std::abs(su.values[i] - sv.values[i]);
      }
      worst_contraction = std::max(worst_contraction, after - before);
      if (after > before * (1 + 1e-12)) ++contraction_fail;

      GridField w = u;
      for (auto& x : w.values) x = std::min(x + std::abs(rng.uniform(0, 0.5)), 1.0);
      const GridField sw = explicit_step(w, scheme);
      bool ordered = true;
      for (std::size_t i = 0; i < n_cells; ++i)
        ordered = ordered && sw.values[i] >= su.values[i] - 1e-12;
      if (!ordered) ++monotone_fail;
    }
  });

  // error-bound check on the shipped dictionary configuration
  bool bound_ok = false, bound_simplex_ok = false;
  double bound_margin = 0, simplex_margin = 0;
  manifest.phase("error_bound", [&] {
    const std::vector<double> mus = cfg.has("dictionary.samples")
                                        ? cfg.real_list("dictionary.samples")
                                        : std::vector<double>{0.0, 0.2, 0.4, 0.6, 1.0};
    if (mus.empty()) throw config_error("dictionary.samples is empty");
    std::vector<Trajectory> entries;
    for (double mu : mus) {
      BurgersProblem p;
      p.mu = mu;
      p.n_cells = n_cells;
      p.t_final = cfg.real("hdm.t_final", 1.0);
      entries.push_back(solve_burgers(p));
    }
    const Dictionary dict = build_dictionary(std::move(entries), seed);
    const double mu_star = cfg.real("hdm.mu", 0.5);
    const GridField w0 = burgers_initial(mu_star, dict.grid);
    SchemeConfig rom_scheme = scheme;
    rom_scheme.cfl = 1.0;
    rom_scheme.dt.reset();

    RomConfig rom = rom_config_from(cfg);
    rom.method = RomMethod::l1_irls;
    rom.eps_tol = 1e-10;
    rom.perturb_eps = 0.0;
    const RomTrajectory traj = rom_solve_unsteady(dict, w0, rom_scheme, rom);
    const ErrorBoundReport rep =
        check_error_bound(dict, w0, traj, rom_scheme, 0.0, false);
    bound_ok = rep.passed;
    bound_margin = rep.worst_margin;

    BurgersProblem tp;
    tp.mu = mu_star;
    tp.n_cells = n_cells;
    tp.t_final = cfg.real("hdm.t_final", 1.0);
    const Trajectory truth = solve_burgers(tp);
    RomConfig simplex = rom;
    simplex.constraint = Constraint::unit_simplex;
    const RomTrajectory straj = rom_solve_unsteady(dict, w0, rom_scheme, simplex);
    const ErrorBoundReport srep =
        check_error_bound(dict, w0, straj, rom_scheme, 0.0, true, &truth);
    bound_simplex_ok = srep.passed;
    simplex_margin = srep.worst_margin;
  });

  std::string csv = "check,pass,detail\n";
  csv += "contraction," + std::to_string(contraction_fail == 0 ? 1 : 0) + ",worst_excess=" +
         format_double(worst_contraction) + " failures=" + std::to_string(contraction_fail) +
         "/" + std::to_string(n_pairs) + "\n";
  csv += "monotonicity," + std::to_string(monotone_fail == 0 ? 1 : 0) +
         ",failures=" + std::to_string(monotone_fail) + "/" + std::to_string(n_pairs) + "\n";
  csv += "error_bound," + std::to_string(bound_ok ? 1 : 0) +
         ",worst_margin=" + format_double(bound_margin) + "\n";
  csv += "error_bound_simplex," + std::to_string(bound_simplex_ok ? 1 : 0) +
         ",worst_margin=" + format_double(simplex_margin) + "\n";
  manifest.write_text("verify.csv", csv);
  manifest.finalize();

  const bool all_ok =
      contraction_fail == 0 && monotone_fail == 0 && bound_ok && bound_simplex_ok;
  if (!quiet) {
    std::cout << (contraction_fail == 0 ? "PASS" : "FAIL") << " contraction ("
              << contraction_fail << "/" << n_pairs << " failures)\n"
              << (monotone_fail == 0 ? "PASS" : "FAIL") << " monotonicity ("
              << monotone_fail << "/" << n_pairs << " failures)\n"
              << (bound_ok ? "PASS" : "FAIL") << " error_bound (margin "
              << bound_margin << ")\n"
              << (bound_simplex_ok ? "PASS" : "FAIL") << " error_bound_simplex (margin "
              << simplex_margin << ")\n";
  }
  return all_ok ? kExitOk : kExitVerify;
}

int cmd_pod_compare(const Config& cfg, bool quiet) {
  const std::string experiment = experiment_of(cfg);
  if (experiment != "advection")
    throw config_error("pod-compare runs on the advection experiment");

  const GreedyConfig gc = greedy_config_from(cfg);
  const AdvectionProblem base = advection_from(cfg);
  const fs::path out_dir = cfg.str("output.dir", "out");
  Manifest manifest(out_dir, "pod-compare", cfg, quiet);

  Dictionary dict;
  GreedyHistory hist;
  manifest.phase("greedy", [&] {
    auto [d, h] = greedy_sample(gc, make_advection_greedy_driver(base, gc.rom_cfg));
    dict = std::move(d);
    hist = std::move(h);
  });

  const std::vector<double> eps_levels{1e-2, 1e-3, 1e-4};
  std::string csv = "iteration,dict_dim,dict_err_max,dict_err_mean";
  for (double eps : eps_levels) {
    const std::string tag = format_double(eps);
    csv += ",pod" + tag + "_dim,pod" + tag + "_err_max,pod" + tag + "_err_mean";
  }
  csv += "\n";

  manifest.phase("pod_sweep", [&] {
    // truths once per candidate
    std::vector<GridField> truths;
    for (const auto& c : gc.candidates) {
      AdvectionProblem p = base;
      p.mu = c[0];
      truths.push_back(solve_advection_steady(p));
    }

    for (std::size_t it = 0; it < hist.selected.size(); ++it) {
      std::vector<Trajectory> prefix(dict.entries.begin(),
                                     dict.entries.begin() + it + 1);
      const Dictionary sub = build_dictionary(std::move(prefix));
      csv += std::to_string(it) + "," + std::to_string(sub.size()) + "," +
             format_double(hist.error_max[it]) + "," + format_double(hist.error_mean[it]);

      const BasisMatrix snaps = basis_at_time(sub, 0);
      for (double eps : eps_levels) {
        const BasisMatrix pod = pod_compress(snaps, eps);
        // same minimization over the POD basis
        double emax = 0, esum = 0;
        for (std::size_t c = 0; c < gc.candidates.size(); ++c) {
          AdvectionProblem p = base;
          p.mu = gc.candidates[c][0];
          const AdvectionSystem sys = assemble_advection_system(p);
          const Matrix a_eff = sys.apply_to(pod.columns);
          MinimizeProblem mp = linear_problem(a_eff, sys.b, gc.rom_cfg.eta);
          const MinimizeReport rep =
              irls_huber(mp, std::vector<double>(pod.k(), 1.0 / pod.k()),
                         gc.rom_cfg.eps_tol);
          const GridField rec(sub.grid, mat_vec(pod.columns, rep.q));
          const double err = relative_l2_error(rec, truths[c]);
          emax = std::max(emax, err);
          esum += err;
        }
        csv += "," + std::to_string(pod.k()) + "," + format_double(emax) + "," +
               format_double(esum / gc.candidates.size());
      }
      csv += "\n";
    }
  });
  manifest.write_text("pod_compare.csv", csv);
  manifest.finalize();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary-based reduced-order models for 1D conservation laws"};
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir, method, subcommand;
  long seed = -1, threads = -1;
  double mu = std::numeric_limits<double>::quiet_NaN();
  bool quiet = false;

  app.add_option("--config", config_path, "configuration file (key = value sections)");
  app.add_option("--seed", seed, "override run.seed");
  app.add_option("--out", out_dir, "override output.dir");
  app.add_option("--method", method, "override rom.method");
  app.add_option("--mu", mu, "override hdm.mu");
  app.add_option("--threads", threads, "override run.threads");
  app.add_flag("--quiet", quiet, "suppress progress output");

  app.require_subcommand(1);
  for (const char* name : {"hdm", "greedy", "rom", "verify", "pod-compare"})
    app.add_subcommand(name)->callback([&subcommand, name] { subcommand = name; });

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
    if (threads >= 0) cfg.set("run.threads", std::to_string(threads));
    if (!out_dir.empty()) cfg.set("output.dir", out_dir);
    if (!method.empty()) cfg.set("rom.method", method);
    if (!std::isnan(mu)) cfg.set("hdm.mu", format_double(mu));

    if (subcommand == "hdm") return cmd_hdm(cfg, quiet);
    if (subcommand == "greedy") return cmd_greedy(cfg, quiet);
    if (subcommand == "rom") return cmd_rom(cfg, quiet);
    if (subcommand == "verify") return cmd_verify(cfg, quiet);
    if (subcommand == "pod-compare") return cmd_pod_compare(cfg, quiet);
    std::cerr << "error: unknown subcommand\n";
    return kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const parse_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
