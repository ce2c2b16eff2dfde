#include "l1rom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "l1rom/core.hpp"

namespace l1rom {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& cols) {
  if (cols.empty()) throw std::invalid_argument("Matrix: no columns");
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != m.rows())
      throw std::invalid_argument("Matrix: ragged columns");
    std::copy(cols[j].begin(), cols[j].end(), m.col(j).begin());
  }
  return m;
}

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("mat_vec: size mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    auto cj = a.col(j);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += cj[i] * xj;
  }
  return y;
}

std::vector<double> mat_tvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw std::invalid_argument("mat_tvec: size mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    auto cj = a.col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += cj[i] * x[i];
    y[j] = s;
  }
  return y;
}

bool cholesky_solve(Matrix a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("cholesky_solve: shape mismatch");
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tiny = 1e-13 * std::max(max_diag, 1e-300);

  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= a(j, p) * a(j, p);
    if (!(d > tiny)) return false;
    d = std::sqrt(d);
    a(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= a(i, p) * a(j, p);
      a(i, j) = s / d;
    }
  }
  // forward then backward substitution with the factor stored in the lower
  // triangle
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t p = 0; p < i; ++p) s -= a(i, p) * b[p];
    b[i] = s / a(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t p = ii + 1; p < n; ++p) s -= a(p, ii) * b[p];
    b[ii] = s / a(ii, ii);
  }
  x = std::move(b);
  return true;
}

bool lu_solve(Matrix a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("lu_solve: shape mismatch");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t piv = j;
    for (std::size_t i = j + 1; i < n; ++i)
      if (std::abs(a(i, j)) > std::abs(a(piv, j))) piv = i;
    if (std::abs(a(piv, j)) < 1e-300) return false;
    if (piv != j) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(j, c), a(piv, c));
      std::swap(b[j], b[piv]);
    }
    for (std::size_t i = j + 1; i < n; ++i) {
      const double f = a(i, j) / a(j, j);
      a(i, j) = f;
      for (std::size_t c = j + 1; c < n; ++c) a(i, c) -= f * a(j, c);
      b[i] -= f * b[j];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t c = ii + 1; c < n; ++c) s -= a(ii, c) * b[c];
    b[ii] = s / a(ii, ii);
  }
  x = std::move(b);
  return true;
}

bool qr_least_squares(Matrix a, std::vector<double> b, std::vector<double>& x,
                      double tol_rel) {
  const std::size_t n = a.rows(), k = a.cols();
  if (b.size() != n || k > n) throw std::invalid_argument("qr_least_squares: shape mismatch");

  // Householder triangularization applied to b as it goes
  for (std::size_t j = 0; j < k; ++j) {
    auto cj = a.col(j);
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm += cj[i] * cj[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = cj[j] >= 0.0 ? -norm : norm;
    std::vector<double> v(n - j);
    v[0] = cj[j] - alpha;
    for (std::size_t i = j + 1; i < n; ++i) v[i - j] = cj[i];
    double vnorm2 = 0.0;
    for (double vi : v) vnorm2 += vi * vi;
    cj[j] = alpha;
    for (std::size_t i = j + 1; i < n; ++i) cj[i] = 0.0;
    if (vnorm2 == 0.0) continue;
    for (std::size_t col = j + 1; col < k; ++col) {
      auto cc = a.col(col);
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += v[i - j] * cc[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < n; ++i) cc[i] -= f * v[i - j];
    }
    double dot = 0.0;
    for (std::size_t i = j; i < n; ++i) dot += v[i - j] * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = j; i < n; ++i) b[i] -= f * v[i - j];
  }

  double rmax = 0.0;
  for (std::size_t j = 0; j < k; ++j) rmax = std::max(rmax, std::abs(a(j, j)));
  for (std::size_t j = 0; j < k; ++j)
    if (std::abs(a(j, j)) <= tol_rel * std::max(rmax, 1e-300)) return false;

  x.assign(k, 0.0);
  for (std::size_t jj = k; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t c = jj + 1; c < k; ++c) s -= a(jj, c) * x[c];
    x[jj] = s / a(jj, jj);
  }
  return true;
}

SvdResult jacobi_svd(Matrix a) {
  const std::size_t n = a.rows(), k = a.cols();
  const double tol = 1e-15;
  const std::size_t max_sweeps = 60;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        auto cp = a.col(p);
        auto cq = a.col(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = cp[i], vq = cq[i];
          cp[i] = c * vp - s * vq;
          cq[i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double s2 = 0.0;
    for (double v : a.col(j)) s2 += v * v;
    sigma[j] = std::sqrt(s2);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult out;
  out.u = Matrix(n, k);
  out.sigma.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    if (sigma[src] > 0.0) {
      auto dst = out.u.col(j);
      auto cs = a.col(src);
      for (std::size_t i = 0; i < n; ++i) dst[i] = cs[i] / sigma[src];
    }
  }
  return out;
}

std::vector<double> project_to_simplex(std::span<const double> q) {
  std::vector<double> u(q.begin(), q.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double cand = (1.0 - cumsum) / static_cast<double>(j + 1);
    if (u[j] + cand > 0.0) {
      rho = j + 1;
      tau = cand;
    }
  }
  std::vector<double> x(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) x[j] = std::max(q[j] + tau, 0.0);
  (void)rho;
  return x;
}

namespace {

std::vector<double> thomas(std::span<const double> lower, std::span<const double> diag,
                           std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0), d(n, 0.0);
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - lower[i] * c[i - 1];
    if (m == 0.0) throw solver_error("tridiagonal_solve: zero pivot");
    c[i] = (i + 1 < n ? upper[i] : 0.0) / m;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
  }
  for (std::size_t ii = n - 1; ii-- > 0;) d[ii] -= c[ii] * d[ii + 1];
  return d;
}

}  // namespace

std::vector<double> tridiagonal_solve(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs, bool periodic) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("tridiagonal_solve: shape mismatch");
  if (n == 1) return {rhs[0] / (diag[0] + (periodic ? lower[0] + upper[0] : 0.0))};
  if (!periodic) return thomas(lower, diag, upper, rhs);

  // Sherman-Morrison for the wrap couplings lower[0] (row 0 <- col n-1) and
  // upper[n-1] (row n-1 <- col 0).
  const double a0 = lower[0], cn = upper[n - 1];
  const double g = -diag[0];
  std::vector<double> dd(diag.begin(), diag.end());
  dd[0] -= g;
  dd[n - 1] -= a0 * cn / g;
  std::vector<double> u(n, 0.0), y, z;
  u[0] = g;
  u[n - 1] = cn;
  y = thomas(lower, dd, upper, rhs);
  z = thomas(lower, dd, upper, u);
  const double vy = y[0] + (a0 / g) * y[n - 1];
  const double vz = z[0] + (a0 / g) * z[n - 1];
  const double factor = vy / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) y[i] -= factor * z[i];
  return y;
}

}  // namespace l1rom
