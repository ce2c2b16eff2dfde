#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "l1rom/analysis.hpp"
#include "l1rom/greedy.hpp"
#include "l1rom/rom.hpp"

namespace py = pybind11;
using namespace l1rom;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style |
                                                             py::array::forcecast>& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

Matrix matrix_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = r(i, j);
  return m;
}

py::array_t<double> matrix_to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return out;
}

RomConfig make_rom_config(const std::string& method, const std::string& constraint,
                          double eta, double eps_tol, double perturb_eps,
                          std::uint64_t seed) {
  RomConfig cfg;
  cfg.method = rom_method_from_string(method);
  if (constraint == "none")
    cfg.constraint = Constraint::none;
  else if (constraint == "unit_simplex")
    cfg.constraint = Constraint::unit_simplex;
  else
    throw std::invalid_argument("constraint must be 'none' or 'unit_simplex'");
  cfg.eta = eta;
  cfg.eps_tol = eps_tol;
  cfg.perturb_eps = perturb_eps;
  cfg.seed = seed;
  return cfg;
}

py::dict report_to_dict(const MinimizeReport& rep) {
  py::dict d;
  d["q"] = to_array(rep.q);
  d["objective"] = rep.objective;
  d["iterations"] = rep.iterations;
  d["converged"] = rep.converged;
  d["weights_floor_hits"] = rep.weights_floor_hits;
  return d;
}

}  // namespace

PYBIND11_MODULE(_l1rom, m) {
  m.doc() = "Dictionary-based reduced-order models of 1D conservation laws by "
            "L1 residual minimization";

  py::class_<Grid1D>(m, "Grid1D")
      .def(py::init<double, double, std::size_t, bool>(), py::arg("x_min"),
           py::arg("x_max"), py::arg("n_cells"), py::arg("periodic") = false)
      .def_readonly("x_min", &Grid1D::x_min)
      .def_readonly("x_max", &Grid1D::x_max)
      .def_readonly("n_cells", &Grid1D::n_cells)
      .def_readonly("periodic", &Grid1D::periodic)
      .def("dx", &Grid1D::dx)
      .def("center", &Grid1D::center)
      .def("centers", [](const Grid1D& g) {
        std::vector<double> xs(g.n_cells);
        for (std::size_t i = 0; i < g.n_cells; ++i) xs[i] = g.center(i);
        return to_array(xs);
      });

  py::class_<GridField>(m, "GridField")
      .def(py::init([](const Grid1D& g, py::array_t<double> values, std::size_t p) {
             return GridField(g, from_array(values), p);
           }),
           py::arg("grid"), py::arg("values"), py::arg("n_components") = 1)
      .def_readonly("grid", &GridField::grid)
      .def_readonly("n_components", &GridField::n_components)
      .def_property_readonly("values",
                             [](const GridField& f) { return to_array(f.values); })
      .def("component", [](const GridField& f, std::size_t c) {
        auto s = f.component(c);
        return to_array(std::vector<double>(s.begin(), s.end()));
      });

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("mu", &Trajectory::mu)
      .def_property_readonly("times",
                             [](const Trajectory& t) { return to_array(t.times); })
      .def_readonly("states", &Trajectory::states)
      .def_readonly("scheme_id", &Trajectory::scheme_id);

  py::class_<Dictionary>(m, "Dictionary")
      .def_readonly("entries", &Dictionary::entries)
      .def_readonly("grid", &Dictionary::grid)
      .def_readonly("n_components", &Dictionary::n_components)
      .def_property_readonly("time_grid",
                             [](const Dictionary& d) { return to_array(d.time_grid); })
      .def("__len__", &Dictionary::size);

  // norms
  m.def("l1_norm",
        [](py::array_t<double> v) { return l1_norm(std::span<const double>(from_array(v))); });
  m.def("relative_l2_error", &relative_l2_error);
  m.def("total_variation", &total_variation, py::arg("field"), py::arg("component") = 0);

  // high-dimensional models
  m.def(
      "advection_source",
      [](double x, double mu, double k) { return advection_source(x, mu, k); },
      py::arg("x"), py::arg("mu"), py::arg("k") = 100.0);
  m.def(
      "solve_advection_steady",
      [](double mu, double k, std::size_t n_cells) {
        AdvectionProblem p;
        p.mu = mu;
        p.k = k;
        p.n_cells = n_cells;
        return solve_advection_steady(p);
      },
      py::arg("mu"), py::arg("k") = 100.0, py::arg("n_cells") = 1000);
  m.def(
      "assemble_advection_system",
      [](double mu, double k, std::size_t n_cells) {
        AdvectionProblem p;
        p.mu = mu;
        p.k = k;
        p.n_cells = n_cells;
        const AdvectionSystem sys = assemble_advection_system(p);
        return py::make_tuple(matrix_to_array(sys.dense()), to_array(sys.b));
      },
      py::arg("mu"), py::arg("k") = 100.0, py::arg("n_cells") = 1000);
  m.def("godunov_flux_burgers", &godunov_flux_burgers);
  m.def("pressure", &pressure, py::arg("rho"), py::arg("momentum"), py::arg("energy"),
        py::arg("gamma") = 1.4);
  m.def("burgers_initial", &burgers_initial);
  m.def(
      "solve_burgers",
      [](double mu, std::size_t n_cells, double t_final, double cfl) {
        BurgersProblem p;
        p.mu = mu;
        p.n_cells = n_cells;
        p.t_final = t_final;
        p.cfl = cfl;
        return solve_burgers(p);
      },
      py::arg("mu"), py::arg("n_cells") = 400, py::arg("t_final") = 3.141592653589793,
      py::arg("cfl") = 0.9);
  m.def("euler_initial", &euler_initial, py::arg("mu"), py::arg("grid"),
        py::arg("gamma") = 1.4);
  m.def(
      "solve_euler",
      [](double mu, std::size_t n_cells, double t_final, double gamma) {
        EulerProblem p;
        p.mu = mu;
        p.n_cells = n_cells;
        p.t_final = t_final;
        p.gamma = gamma;
        return solve_euler(p);
      },
      py::arg("mu"), py::arg("n_cells") = 1000, py::arg("t_final") = 0.16,
      py::arg("gamma") = 1.4);
  m.def("nozzle_area", [](double x) { return nozzle_area(x); });
  m.def(
      "solve_nozzle_steady",
      [](double mu, std::size_t n_cells) {
        NozzleProblem p;
        p.mu = mu;
        p.n_cells = n_cells;
        return solve_nozzle_steady(p);
      },
      py::arg("mu"), py::arg("n_cells") = 200);
  m.def(
      "nozzle_mach",
      [](const GridField& w, double gamma) { return to_array(nozzle_mach(w, gamma)); },
      py::arg("state"), py::arg("gamma") = 1.4);

  // dictionaries
  m.def("build_dictionary", &build_dictionary, py::arg("entries"), py::arg("seed") = 0);
  m.def("save_dictionary", &save_dictionary);
  m.def("load_dictionary", &load_dictionary);
  m.def(
      "basis_at_time",
      [](const Dictionary& d, std::size_t n, py::object component) {
        std::optional<std::size_t> c;
        if (!component.is_none()) c = component.cast<std::size_t>();
        return matrix_to_array(basis_at_time(d, n, c).columns);
      },
      py::arg("dictionary"), py::arg("n"), py::arg("component") = py::none());
  m.def(
      "numerical_rank",
      [](py::array_t<double> a, double tol_rel) {
        BasisMatrix b;
        b.columns = matrix_from_array(a);
        b.block_rows = b.columns.rows();
        return numerical_rank(b, tol_rel);
      },
      py::arg("columns"), py::arg("tol_rel") = 1e-10);
  m.def(
      "perturb",
      [](py::array_t<double> a, double epsilon_rel, std::uint64_t seed) {
        BasisMatrix b;
        b.columns = matrix_from_array(a);
        b.block_rows = b.columns.rows();
        return matrix_to_array(perturb(b, epsilon_rel, seed).columns);
      },
      py::arg("columns"), py::arg("epsilon_rel"), py::arg("seed") = 0);
  m.def(
      "pod_compress",
      [](py::array_t<double> a, double eps_pod) {
        BasisMatrix b;
        b.columns = matrix_from_array(a);
        b.block_rows = b.columns.rows();
        return matrix_to_array(pod_compress(b, eps_pod).columns);
      },
      py::arg("snapshots"), py::arg("eps_pod"));

  // minimization over a linear residual r(q) = A q + b
  m.def("huber_value", &huber_value);
  m.def(
      "minimize_linear",
      [](py::array_t<double> a, py::array_t<double> b, const std::string& method,
         const std::string& constraint, double eta, double eps_tol) {
        const Matrix a_eff = matrix_from_array(a);
        const std::vector<double> rhs = from_array(b);
        const RomConfig cfg = make_rom_config(method, constraint, eta, eps_tol, 0.0, 0);
        const std::vector<double> q0(a_eff.cols(), 1.0 / a_eff.cols());
        MinimizeReport rep;
        if (cfg.method == RomMethod::l1_lp) {
          rep = l1_min_lp(a_eff, rhs, cfg.constraint);
        } else {
          MinimizeProblem p = linear_problem(a_eff, rhs, eta, cfg.constraint);
          switch (cfg.method) {
            case RomMethod::l1_irls: rep = irls_l1(p, q0, eps_tol); break;
            case RomMethod::huber_irls: rep = irls_huber(p, q0, eps_tol); break;
            case RomMethod::l2: rep = l2_min(p, q0, eps_tol); break;
            case RomMethod::galerkin: rep = galerkin_solve(p, q0, eps_tol); break;
            default: break;
          }
        }
        return report_to_dict(rep);
      },
      py::arg("a"), py::arg("b"), py::arg("method") = "l1_irls",
      py::arg("constraint") = "none", py::arg("eta") = 1e-8, py::arg("eps_tol") = 1e-8);

  // reduced-order model drivers
  py::class_<RomStep>(m, "RomStep")
      .def_readonly("coords", &RomStep::coords)
      .def_readonly("projection_residual", &RomStep::projection_residual);

  py::class_<RomTrajectory>(m, "RomTrajectory")
      .def_property_readonly("times",
                             [](const RomTrajectory& t) { return to_array(t.times); })
      .def_readonly("reconstructed", &RomTrajectory::reconstructed)
      .def_readonly("steps", &RomTrajectory::steps);

  m.def(
      "rom_solve_steady_advection",
      [](const Dictionary& d, double mu, const std::string& method,
         const std::string& constraint, double eta, double eps_tol, double perturb_eps,
         std::uint64_t seed) {
        AdvectionProblem p;
        p.mu = mu;
        p.n_cells = d.grid.n_cells;
        const RomConfig cfg =
            make_rom_config(method, constraint, eta, eps_tol, perturb_eps, seed);
        const ReducedSolution sol =
            rom_solve_steady(d, assemble_advection_system(p), cfg);
        return py::make_tuple(sol.reconstruction, report_to_dict(sol.report));
      },
      py::arg("dictionary"), py::arg("mu"), py::arg("method") = "l1_irls",
      py::arg("constraint") = "none", py::arg("eta") = 1e-8, py::arg("eps_tol") = 1e-4,
      py::arg("perturb_eps") = 1e-9, py::arg("seed") = 0);
  m.def(
      "rom_solve_unsteady_burgers",
      [](const Dictionary& d, double mu, const std::string& method,
         const std::string& constraint, double eta, double eps_tol, double perturb_eps,
         std::uint64_t seed) {
        SchemeConfig scheme;
        scheme.flux_id = FluxId::godunov_burgers;
        scheme.cfl = 1.0;
        const RomConfig cfg =
            make_rom_config(method, constraint, eta, eps_tol, perturb_eps, seed);
        return rom_solve_unsteady(d, burgers_initial(mu, d.grid), scheme, cfg);
      },
      py::arg("dictionary"), py::arg("mu"), py::arg("method") = "l1_irls",
      py::arg("constraint") = "none", py::arg("eta") = 1e-8, py::arg("eps_tol") = 1e-4,
      py::arg("perturb_eps") = 1e-9, py::arg("seed") = 0);
  m.def(
      "euler_rom",
      [](const Dictionary& d, double mu, double t_final, const std::string& strategy,
         const std::string& method, double eta, double eps_tol, double perturb_eps,
         std::uint64_t seed) {
        const RomConfig cfg = make_rom_config(method, "none", eta, eps_tol, perturb_eps, seed);
        if (strategy == "single")
          return euler_rom_single_expansion(d, cfg, mu, t_final);
        if (strategy == "per_variable") return euler_rom_per_variable(d, cfg, mu, t_final);
        throw std::invalid_argument("strategy must be 'single' or 'per_variable'");
      },
      py::arg("dictionary"), py::arg("mu"), py::arg("t_final") = 0.16,
      py::arg("strategy") = "per_variable", py::arg("method") = "l1_irls",
      py::arg("eta") = 1e-8, py::arg("eps_tol") = 1e-4, py::arg("perturb_eps") = 1e-9,
      py::arg("seed") = 0);

  // greedy sampling of the advection parameter space
  py::class_<GreedyHistory>(m, "GreedyHistory")
      .def_readonly("selected", &GreedyHistory::selected)
      .def_property_readonly(
          "indicator_max",
          [](const GreedyHistory& h) { return to_array(h.indicator_max); })
      .def_property_readonly(
          "error_max", [](const GreedyHistory& h) { return to_array(h.error_max); })
      .def_property_readonly(
          "error_mean", [](const GreedyHistory& h) { return to_array(h.error_mean); })
      .def_readonly("indicator_table", &GreedyHistory::indicator_table)
      .def_readonly("error_table", &GreedyHistory::error_table);

  m.def(
      "greedy_sample_advection",
      [](const std::vector<double>& candidates, double mu0, std::size_t max_samples,
         double eps_stop, std::size_t n_cells, const std::string& method, double eps_tol,
         std::size_t threads) {
        AdvectionProblem base;
        base.n_cells = n_cells;
        GreedyConfig cfg;
        for (double c : candidates) cfg.candidates.push_back({c});
        cfg.mu0 = {mu0};
        cfg.max_samples = max_samples;
        cfg.eps_stop = eps_stop;
        cfg.rom_cfg = make_rom_config(method, "none", 1e-8, eps_tol, 0.0, 0);
        cfg.threads = threads;
        auto [dict, hist] = greedy_sample(cfg, make_advection_greedy_driver(base, cfg.rom_cfg));
        return py::make_tuple(dict, hist);
      },
      py::arg("candidates"), py::arg("mu0"), py::arg("max_samples") = 10,
      py::arg("eps_stop") = 0.0, py::arg("n_cells") = 1000,
      py::arg("method") = "huber_irls", py::arg("eps_tol") = 1e-10, py::arg("threads") = 1);

  m.def("pearson_correlation", [](py::array_t<double> x, py::array_t<double> y) {
    return pearson_correlation(from_array(x), from_array(y));
  });

  m.attr("__version__") = "0.1.0";
}
