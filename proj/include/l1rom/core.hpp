#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace l1rom {

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Explicit step rejected: dt exceeds the monotonicity bound.
struct cfl_error : solver_error {
  cfl_error(const std::string& what, double admissible)
      : solver_error(what), admissible_dt(admissible) {}
  double admissible_dt;
};

struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t line_no)
      : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
  std::size_t line;
};

/// Uniform 1D cell grid over [x_min, x_max]. Cell centers sit at
/// x_min + (i + 1/2) dx.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 2;
  bool periodic = false;

  Grid1D() = default;
  Grid1D(double xmin, double xmax, std::size_t n, bool periodic_grid = false);

  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double center(std::size_t i) const {
    return x_min + (static_cast<double>(i) + 0.5) * dx();
  }
  bool operator==(const Grid1D&) const = default;
};

/// Scalar (p=1) or vector (p>1) state on a grid, stored component-major:
/// all cells of component 0, then component 1, ...
struct GridField {
  Grid1D grid;
  std::size_t n_components = 1;
  std::vector<double> values;

  GridField() = default;
  GridField(Grid1D g, std::size_t p, double fill = 0.0);
  GridField(Grid1D g, std::vector<double> vals, std::size_t p = 1);

  std::size_t size() const { return values.size(); }
  double& at(std::size_t component, std::size_t cell) {
    return values[component * grid.n_cells + cell];
  }
  double at(std::size_t component, std::size_t cell) const {
    return values[component * grid.n_cells + cell];
  }
  std::span<const double> component(std::size_t c) const;
  std::span<double> component(std::size_t c);
};

/// Time-indexed sequence of states for one parameter instance.
struct Trajectory {
  std::vector<double> mu;
  std::vector<double> times;
  std::vector<GridField> states;
  std::string scheme_id;

  /// Throws std::invalid_argument when the shape invariants are broken.
  void validate() const;
};

/// A (time, parameter) pair labelling one snapshot.
struct Tau {
  double t = 0.0;
  std::vector<double> mu;
};

/// Plain sum of absolute entries. Cell-width weights are the caller's
/// business so the same norm serves grid fields and coefficient vectors.
double l1_norm(std::span<const double> v);
double l1_norm(const GridField& f);

/// ||approx - reference||_2 / ||reference||_2 on matching fields.
double relative_l2_error(const GridField& approx, const GridField& reference);

/// Sum of absolute neighbour differences of one component, with the wrap
/// term on periodic grids.
double total_variation(const GridField& f, std::size_t component = 0);

}  // namespace l1rom
