#include "l1rom/dictionary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "l1rom/rng.hpp"

namespace l1rom {

namespace {

double mu_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dictionary: parameter dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

Dictionary build_dictionary(std::vector<Trajectory> entries, std::uint64_t seed) {
  if (entries.empty()) throw std::invalid_argument("build_dictionary: no entries");
  for (const auto& e : entries) e.validate();
  const auto& first = entries.front();
  for (const auto& e : entries) {
    if (!(e.states.front().grid == first.states.front().grid))
      throw std::invalid_argument("build_dictionary: entries must share one grid");
    if (e.states.front().n_components != first.states.front().n_components)
      throw std::invalid_argument("build_dictionary: entries must share n_components");
    if (e.times != first.times)
      throw std::invalid_argument("build_dictionary: entries must share the time grid");
  }
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i].mu == entries[j].mu)
        throw std::invalid_argument("build_dictionary: duplicate parameter");

  Dictionary d;
  d.grid = first.states.front().grid;
  d.n_components = first.states.front().n_components;
  d.time_grid = first.times;
  d.seed = seed;
  d.entries = std::move(entries);
  return d;
}

BasisMatrix basis_at_time(const Dictionary& d, std::size_t n,
                          std::optional<std::size_t> component) {
  if (n >= d.time_grid.size()) throw std::out_of_range("basis_at_time: time index");
  if (component && *component >= d.n_components)
    throw std::out_of_range("basis_at_time: component index");

  const std::size_t nc = d.grid.n_cells;
  const std::size_t rows = component ? nc : nc * d.n_components;
  BasisMatrix m;
  m.columns = Matrix(rows, d.size());
  m.component = component;
  m.block_rows = nc;
  m.n_blocks = component ? 1 : d.n_components;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const GridField& s = d.entries[j].states[n];
    auto dst = m.columns.col(j);
    if (component) {
      auto src = s.component(*component);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      std::copy(s.values.begin(), s.values.end(), dst.begin());
    }
    m.source_taus.push_back({d.time_grid[n], d.entries[j].mu});
  }
  return m;
}

Dictionary select_local(const Dictionary& d, const Tau& tau_star, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("select_local: window must be positive");
  std::vector<Trajectory> picked;
  for (const auto& e : d.entries)
    if (mu_distance(e.mu, tau_star.mu) <= window) picked.push_back(e);

  if (picked.empty()) {
    // fall back to the two nearest members
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return mu_distance(d.entries[a].mu, tau_star.mu) <
             mu_distance(d.entries[b].mu, tau_star.mu);
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, d.size()); ++i)
      picked.push_back(d.entries[order[i]]);
  }
  return build_dictionary(std::move(picked), d.seed);
}

BasisMatrix perturb(const BasisMatrix& m, double epsilon_rel, std::uint64_t seed) {
  if (epsilon_rel < 0.0) throw std::invalid_argument("perturb: epsilon_rel must be >= 0");
  BasisMatrix out = m;
  out.perturbed = true;
  if (epsilon_rel == 0.0) return out;

  Rng rng(seed);
  for (std::size_t blk = 0; blk < m.n_blocks; ++blk) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m.k(); ++j) {
      auto cj = m.columns.col(j);
      for (std::size_t i = blk * m.block_rows; i < (blk + 1) * m.block_rows; ++i) {
        lo = std::min(lo, cj[i]);
        hi = std::max(hi, cj[i]);
      }
    }
    const double eps = epsilon_rel * (hi - lo);
    for (std::size_t j = 0; j < m.k(); ++j) {
      auto cj = out.columns.col(j);
      for (std::size_t i = blk * m.block_rows; i < (blk + 1) * m.block_rows; ++i)
        cj[i] += rng.uniform(-eps, eps);
    }
  }
  return out;
}

std::size_t numerical_rank(const BasisMatrix& m, double tol_rel) {
  if (!(tol_rel > 0.0)) throw std::invalid_argument("numerical_rank: tol_rel must be positive");
  const SvdResult svd = jacobi_svd(m.columns);
  if (svd.sigma.empty() || svd.sigma.front() == 0.0) return 0;
  const double cut = tol_rel * svd.sigma.front();
  std::size_t rank = 0;
  for (double s : svd.sigma)
    if (s > cut) ++rank;
  return rank;
}

BasisMatrix pod_compress(const BasisMatrix& snapshots, double eps_pod) {
  if (!(eps_pod > 0.0 && eps_pod < 1.0))
    throw std::invalid_argument("pod_compress: eps_pod must be in (0,1)");
  const SvdResult svd = jacobi_svd(snapshots.columns);
  double total = 0.0;
  for (double s : svd.sigma) total += s * s;
  if (total == 0.0) throw solver_error("pod_compress: zero snapshot matrix");

  const std::size_t k = svd.sigma.size();
  std::size_t kept = k;
  double tail = 0.0;
  // smallest kept with tail energy <= eps_pod * total
  for (std::size_t j = k; j-- > 0;) {
    const double cand = tail + svd.sigma[j] * svd.sigma[j];
    if (cand <= eps_pod * total && j > 0) {
      tail = cand;
      kept = j;
    } else {
      break;
    }
  }
  kept = std::max<std::size_t>(kept, 1);

  BasisMatrix out;
  out.columns = Matrix(svd.u.rows(), kept);
  for (std::size_t j = 0; j < kept; ++j) {
    auto src = svd.u.col(j);
    std::copy(src.begin(), src.end(), out.columns.col(j).begin());
  }
  out.block_rows = snapshots.block_rows ? snapshots.block_rows : svd.u.rows();
  out.n_blocks = 1;
  out.component = snapshots.component;
  return out;
}

namespace {

void put_double(std::string& line, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

double get_double(std::string_view& sv, std::size_t line_no) {
  while (!sv.empty() && sv.front() == ' ') sv.remove_prefix(1);
  if (sv.empty()) throw parse_error("dictionary: missing value", line_no);
  double v = 0.0;
  auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (res.ec != std::errc())
    throw parse_error("dictionary: bad numeric value", line_no);
  sv.remove_prefix(static_cast<std::size_t>(res.ptr - sv.data()));
  return v;
}

}  // namespace

void save_dictionary(const Dictionary& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dictionary: cannot open " + path);

  out << "L1ROM-DICT v1\n";
  std::string header = "N " + std::to_string(d.grid.n_cells) + " P " +
                       std::to_string(d.n_components) + " K " + std::to_string(d.size()) +
                       " T " + std::to_string(d.time_grid.size()) + " PERIODIC " +
                       (d.grid.periodic ? "1" : "0") + " XMIN ";
  put_double(header, d.grid.x_min);
  header += " XMAX ";
  put_double(header, d.grid.x_max);
  out << header << "\n";

  std::string line;
  for (std::size_t i = 0; i < d.time_grid.size(); ++i) {
    if (i) line += ' ';
    put_double(line, d.time_grid[i]);
  }
  out << line << "\n";

  for (const auto& e : d.entries) {
    line = "MU";
    for (double m : e.mu) {
      line += ' ';
      put_double(line, m);
    }
    out << line << "\n";
    for (const auto& s : e.states) {
      line.clear();
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (i) line += ' ';
        put_double(line, s.values[i]);
      }
      out << line << "\n";
    }
  }
  if (!out) throw std::runtime_error("save_dictionary: write failure on " + path);
}

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dictionary: cannot open " + path);
  std::size_t line_no = 0;
  std::string line;

  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw parse_error("dictionary: truncated file", line_no + 1);
    ++line_no;
    return line;
  };

  if (next_line() != "L1ROM-DICT v1")
    throw parse_error("dictionary: unsupported version header", line_no);

  std::istringstream hdr(next_line());
  std::string tag;
  std::size_t n = 0, p = 0, k = 0, t = 0;
  int periodic = 0;
  double xmin = 0.0, xmax = 0.0;
  std::string xmins, xmaxs;
  if (!(hdr >> tag >> n) || tag != "N")
    throw parse_error("dictionary: bad header (N)", line_no);
  if (!(hdr >> tag >> p) || tag != "P")
    throw parse_error("dictionary: bad header (P)", line_no);
  if (!(hdr >> tag >> k) || tag != "K")
    throw parse_error("dictionary: bad header (K)", line_no);
  if (!(hdr >> tag >> t) || tag != "T")
    throw parse_error("dictionary: bad header (T)", line_no);
  if (!(hdr >> tag >> periodic) || tag != "PERIODIC")
    throw parse_error("dictionary: bad header (PERIODIC)", line_no);
  if (!(hdr >> tag >> xmins) || tag != "XMIN")
    throw parse_error("dictionary: bad header (XMIN)", line_no);
  if (!(hdr >> tag >> xmaxs) || tag != "XMAX")
    throw parse_error("dictionary: bad header (XMAX)", line_no);
  {
    std::string_view sv = xmins;
    xmin = get_double(sv, line_no);
    sv = xmaxs;
    xmax = get_double(sv, line_no);
  }
  if (n < 2 || p == 0 || k == 0 || t == 0)
    throw parse_error("dictionary: degenerate header", line_no);

  Grid1D grid(xmin, xmax, n, periodic != 0);

  std::vector<double> times(t);
  {
    std::string_view sv = next_line();
    for (std::size_t i = 0; i < t; ++i) times[i] = get_double(sv, line_no);
  }

  std::vector<Trajectory> entries;
  entries.reserve(k);
  for (std::size_t e = 0; e < k; ++e) {
    std::string_view sv = next_line();
    if (sv.substr(0, 2) != "MU")
      throw parse_error("dictionary: expected MU line", line_no);
    sv.remove_prefix(2);
    Trajectory traj;
    traj.times = times;
    while (true) {
      while (!sv.empty() && sv.front() == ' ') sv.remove_prefix(1);
      if (sv.empty()) break;
      traj.mu.push_back(get_double(sv, line_no));
    }
    if (traj.mu.empty()) throw parse_error("dictionary: empty MU line", line_no);
    for (std::size_t s = 0; s < t; ++s) {
      std::string_view row = next_line();
      std::vector<double> vals(n * p);
      for (std::size_t i = 0; i < n * p; ++i) vals[i] = get_double(row, line_no);
      traj.states.emplace_back(grid, std::move(vals), p);
    }
    entries.push_back(std::move(traj));
  }
  return build_dictionary(std::move(entries));
}

}  // namespace l1rom
