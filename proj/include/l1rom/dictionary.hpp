#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "l1rom/core.hpp"
#include "l1rom/linalg.hpp"

namespace l1rom {

/// Ordered collection of trajectories sharing one grid and one time grid.
/// Immutable after construction; basis extraction never mutates entries.
struct Dictionary {
  std::vector<Trajectory> entries;
  Grid1D grid;
  std::size_t n_components = 1;
  std::vector<double> time_grid;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
};

/// Validates shape invariants (shared grid/time grid, distinct parameters)
/// and assembles the dictionary.
Dictionary build_dictionary(std::vector<Trajectory> entries, std::uint64_t seed = 0);

/// Snapshot columns extracted at one time level. block_rows/n_blocks record
/// the per-variable layout so perturbations can scale per component.
struct BasisMatrix {
  Matrix columns;
  std::vector<Tau> source_taus;
  bool perturbed = false;
  std::optional<std::size_t> component;
  std::size_t block_rows = 0;
  std::size_t n_blocks = 1;

  std::size_t k() const { return columns.cols(); }
};

/// Columns are the dictionary members at time index n; with component set,
/// only that variable's contiguous block.
BasisMatrix basis_at_time(const Dictionary& d, std::size_t n,
                          std::optional<std::size_t> component = std::nullopt);

/// Sub-dictionary of members with |mu_i - mu*| <= window; when that comes up
/// empty, falls back to the two nearest members.
Dictionary select_local(const Dictionary& d, const Tau& tau_star, double window);

/// Adds i.i.d. uniform noise in [-eps, eps] with eps = epsilon_rel * L_ref,
/// L_ref computed per component block as the spread (max - min) of that
/// variable over the columns. Deterministic in the seed.
BasisMatrix perturb(const BasisMatrix& m, double epsilon_rel, std::uint64_t seed);

/// Number of singular values above tol_rel * sigma_max.
std::size_t numerical_rank(const BasisMatrix& m, double tol_rel = 1e-10);

/// Orthonormal POD basis truncated at relative tail energy eps_pod:
/// k' = smallest k with sum_{i>k} sigma_i^2 <= eps_pod * sum_i sigma_i^2.
BasisMatrix pod_compress(const BasisMatrix& snapshots, double eps_pod);

/// Line-oriented text format, round-trip exact (shortest decimal digits).
void save_dictionary(const Dictionary& d, const std::string& path);
Dictionary load_dictionary(const std::string& path);

}  // namespace l1rom
