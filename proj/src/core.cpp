#include "l1rom/core.hpp"

#include <cmath>
#include <cstdlib>

namespace l1rom {

Grid1D::Grid1D(double xmin, double xmax, std::size_t n, bool periodic_grid)
    : x_min(xmin), x_max(xmax), n_cells(n), periodic(periodic_grid) {
  if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
  if (n_cells < 2) throw std::invalid_argument("Grid1D: need at least 2 cells");
}

GridField::GridField(Grid1D g, std::size_t p, double fill)
    : grid(g), n_components(p), values(p * g.n_cells, fill) {
  if (p == 0) throw std::invalid_argument("GridField: n_components must be positive");
}

GridField::GridField(Grid1D g, std::vector<double> vals, std::size_t p)
    : grid(g), n_components(p), values(std::move(vals)) {
  if (p == 0) throw std::invalid_argument("GridField: n_components must be positive");
  if (values.size() != n_components * grid.n_cells)
    throw std::invalid_argument("GridField: values length does not match p * n_cells");
}

std::span<const double> GridField::component(std::size_t c) const {
  if (c >= n_components) throw std::out_of_range("GridField: component index");
  return {values.data() + c * grid.n_cells, grid.n_cells};
}

std::span<double> GridField::component(std::size_t c) {
  if (c >= n_components) throw std::out_of_range("GridField: component index");
  return {values.data() + c * grid.n_cells, grid.n_cells};
}

void Trajectory::validate() const {
  if (states.size() != times.size())
    throw std::invalid_argument("Trajectory: states/times length mismatch");
  if (times.empty()) throw std::invalid_argument("Trajectory: empty");
  if (times.front() != 0.0) throw std::invalid_argument("Trajectory: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("Trajectory: times must be strictly increasing");
  for (const auto& s : states) {
    if (!(s.grid == states.front().grid) || s.n_components != states.front().n_components)
      throw std::invalid_argument("Trajectory: states must share grid and components");
  }
}

double l1_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("l1_norm: non-finite entry");
    sum += std::abs(x);
  }
  return sum;
}

double l1_norm(const GridField& f) { return l1_norm(std::span<const double>(f.values)); }

double relative_l2_error(const GridField& approx, const GridField& reference) {
  if (!(approx.grid == reference.grid) || approx.n_components != reference.n_components)
    throw std::invalid_argument("relative_l2_error: mismatched fields");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.values.size(); ++i) {
    const double d = approx.values[i] - reference.values[i];
    num += d * d;
    den += reference.values[i] * reference.values[i];
  }
  if (den <= 0.0)
    throw std::invalid_argument("relative_l2_error: reference has zero norm");
  return std::sqrt(num / den);
}

double total_variation(const GridField& f, std::size_t component) {
  auto g = f.component(component);
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) tv += std::abs(g[i + 1] - g[i]);
  if (f.grid.periodic && g.size() > 1) tv += std::abs(g.front() - g.back());
  return tv;
}

}  // namespace l1rom
