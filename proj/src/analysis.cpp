#include "l1rom/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace l1rom {

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson_correlation: need matched samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

double jump_centroid(std::span<const double> rho, const Grid1D& grid, std::size_t lo,
                     std::size_t hi) {
  double mass = 0.0, moment = 0.0;
  for (std::size_t i = lo; i < hi && i + 1 < rho.size(); ++i) {
    const double j = std::abs(rho[i + 1] - rho[i]);
    const double x = 0.5 * (grid.center(i) + grid.center(i + 1));
    mass += j;
    moment += j * x;
  }
  return mass > 0.0 ? moment / mass : grid.center((lo + hi) / 2);
}

}  // namespace

EulerFeatures locate_euler_features(const GridField& state) {
  const auto rho = state.component(0);
  const Grid1D& grid = state.grid;
  const std::size_t n = rho.size();
  const double dx = grid.dx();

  // lightly smoothed jump magnitudes; first-order transport smears the
  // contact over tens of cells, so raw per-cell jumps are too spiky
  std::vector<double> jumps(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) jumps[i] = std::abs(rho[i + 1] - rho[i]);
  std::vector<double> smooth(n - 1, 0.0);
  const long w = std::max<long>(2, static_cast<long>(n) / 200);
  for (long i = 0; i + 1 < static_cast<long>(n); ++i) {
    double s = 0.0;
    long cnt = 0;
    for (long o = -w; o <= w; ++o) {
      const long j = i + o;
      if (j >= 0 && j + 1 < static_cast<long>(n)) {
        s += jumps[static_cast<std::size_t>(j)];
        ++cnt;
      }
    }
    smooth[static_cast<std::size_t>(i)] = s / static_cast<double>(cnt);
  }

  auto argmax_in = [&](double x_lo, double x_hi) {
    std::size_t lo = static_cast<std::size_t>(
        std::clamp((x_lo - grid.x_min) / dx, 0.0, static_cast<double>(n - 2)));
    std::size_t hi = static_cast<std::size_t>(
        std::clamp((x_hi - grid.x_min) / dx, 0.0, static_cast<double>(n - 2)));
    std::size_t arg = lo;
    for (std::size_t i = lo; i <= hi; ++i)
      if (smooth[i] > smooth[arg]) arg = i;
    return arg;
  };
  const std::size_t win = std::max<std::size_t>(6, n / 80);
  auto centroid_around = [&](std::size_t c) {
    const std::size_t lo = c > win ? c - win : 0;
    const std::size_t hi = std::min(c + win, n - 1);
    return jump_centroid(rho, grid, lo, hi);
  };

  // shock: steepest structure in the right part of the domain; contact: the
  // next wave left of it; fan: the smooth descent further left
  EulerFeatures f;
  const std::size_t shock = argmax_in(grid.x_min + 0.72 * (grid.x_max - grid.x_min),
                                      grid.x_max);
  f.shock_x = centroid_around(shock);
  const std::size_t contact =
      argmax_in(0.5 * (grid.x_min + grid.x_max), f.shock_x - 30.0 * dx);
  f.contact_x = centroid_around(contact);
  f.fan_x = jump_centroid(
      rho, grid, 0,
      static_cast<std::size_t>(std::max(2.0, (f.contact_x - grid.x_min) / dx - 30.0)));
  return f;
}

EulerFeatures locate_euler_features_near(const GridField& state,
                                         const EulerFeatures& reference,
                                         std::size_t window_cells) {
  const auto rho = state.component(0);
  const Grid1D& grid = state.grid;
  const double dx = grid.dx();
  auto window = [&](double x_ref) {
    const double pos = (x_ref - grid.x_min) / dx - 0.5;
    const long c = std::lround(pos);
    const long lo = std::max<long>(0, c - static_cast<long>(window_cells));
    const long hi = std::min<long>(static_cast<long>(rho.size()) - 1,
                                   c + static_cast<long>(window_cells));
    return jump_centroid(rho, grid, static_cast<std::size_t>(lo),
                         static_cast<std::size_t>(hi));
  };
  EulerFeatures f;
  f.fan_x = window(reference.fan_x);
  f.contact_x = window(reference.contact_x);
  f.shock_x = window(reference.shock_x);
  return f;
}

double shock_position(const GridField& u) {
  const auto v = u.component(0);
  const Grid1D& grid = u.grid;
  const std::size_t n = v.size();
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double drop = v[i] - v[j];  // downward jumps only
    if (drop > best) {
      best = drop;
      arg = i;
    }
  }
  // centroid of |du| over a few cells around the jump, wrap-aware
  double mass = 0.0, moment = 0.0;
  const double x0 = grid.center(arg);
  const double len = grid.x_max - grid.x_min;
  for (long off = -3; off <= 3; ++off) {
    const std::size_t i = static_cast<std::size_t>(
        (static_cast<long>(arg) + off + 2 * static_cast<long>(n)) % static_cast<long>(n));
    const std::size_t j = (i + 1) % n;
    const double jump = std::abs(v[j] - v[i]);
    double x = grid.center(i) + 0.5 * grid.dx() - x0;
    x -= len * std::round(x / len);
    mass += jump;
    moment += jump * x;
  }
  double pos = x0 + (mass > 0.0 ? moment / mass : 0.0);
  if (pos < grid.x_min) pos += len;
  if (pos >= grid.x_max) pos -= len;
  return pos;
}

double shock_speed(const Trajectory& traj, double t_begin, double t_end) {
  const Grid1D& grid = traj.states.front().grid;
  const double len = grid.x_max - grid.x_min;
  const std::size_t n = grid.n_cells;
  std::vector<double> ts, xs;
  double prev = 0.0, unwrapped = 0.0;
  bool first = true;
  for (std::size_t fi = 0; fi < traj.times.size(); ++fi) {
    if (traj.times[fi] < t_begin || traj.times[fi] > t_end) continue;
    double p;
    if (first) {
      p = shock_position(traj.states[fi]);
      unwrapped = p;
      first = false;
    } else {
      // the initial data repeats every quarter domain, so identical shocks
      // coexist; stay with the one tracked so far
      const auto v = traj.states[fi].component(0);
      const long c = std::lround((prev - grid.x_min) / grid.dx() - 0.5);
      const long w = std::max<long>(8, static_cast<long>(n) / 16);
      std::size_t arg = 0;
      double best = -1.0;
      for (long off = -w; off <= w; ++off) {
        const std::size_t i = static_cast<std::size_t>(
            (c + off + 4 * static_cast<long>(n)) % static_cast<long>(n));
        const std::size_t j = (i + 1) % n;
        const double drop = v[i] - v[j];
        if (drop > best) {
          best = drop;
          arg = i;
        }
      }
      // centroid refinement around the tracked jump
      double mass = 0.0, moment = 0.0;
      const double x0 = grid.center(arg);
      for (long off = -3; off <= 3; ++off) {
        const std::size_t i = static_cast<std::size_t>(
            (static_cast<long>(arg) + off + 2 * static_cast<long>(n)) %
            static_cast<long>(n));
        const std::size_t j = (i + 1) % n;
        const double jump = std::abs(v[j] - v[i]);
        double x = grid.center(i) + 0.5 * grid.dx() - x0;
        x -= len * std::round(x / len);
        mass += jump;
        moment += jump * x;
      }
      p = x0 + (mass > 0.0 ? moment / mass : 0.0);
      double d = p - prev;
      d -= len * std::round(d / len);
      unwrapped += d;
    }
    prev = p;
    ts.push_back(traj.times[fi]);
    xs.push_back(unwrapped);
  }
  if (ts.size() < 2) throw std::invalid_argument("shock_speed: not enough samples");
  // least-squares slope
  const double ns = static_cast<double>(ts.size());
  double mt = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    mx += xs[i];
  }
  mt /= ns;
  mx /= ns;
  double stx = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stx += (ts[i] - mt) * (xs[i] - mx);
    stt += (ts[i] - mt) * (ts[i] - mt);
  }
  return stx / stt;
}

}  // namespace l1rom
