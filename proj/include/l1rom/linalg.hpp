#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace l1rom {

/// Dense column-major matrix; column access is the hot path everywhere.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<std::vector<double>>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);
/// A^T x
std::vector<double> mat_tvec(const Matrix& a, std::span<const double> x);

/// Solves a x = b for symmetric positive definite a (destroyed in place).
/// Returns false when a pivot drops below tiny * max diagonal, which is how
/// rank deficiency surfaces for unregularized normal equations.
bool cholesky_solve(Matrix a, std::vector<double> b, std::vector<double>& x);

/// Solves a x = b by LU with partial pivoting; false when singular.
bool lu_solve(Matrix a, std::vector<double> b, std::vector<double>& x);

/// Least squares min ||a x - b||_2 via Householder QR. Returns false when a
/// diagonal of R falls below tol_rel * max |R_jj|, the rank-deficiency
/// signal for unregularized solves.
bool qr_least_squares(Matrix a, std::vector<double> b, std::vector<double>& x,
                      double tol_rel = 1e-13);

/// Thin SVD of an N x k matrix (k small) by one-sided Jacobi rotations.
/// Singular values come back sorted descending; columns of u with sigma = 0
/// are zero vectors. Accurate to eps * sigma_max, which matters for the
/// rank decisions made on nearly dependent snapshot sets.
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
};
SvdResult jacobi_svd(Matrix a);

/// Euclidean projection onto { q >= 0, sum q = 1 }.
std::vector<double> project_to_simplex(std::span<const double> q);

/// Tridiagonal solve (Thomas). lower[0] and upper[n-1] are ignored unless
/// periodic, in which case they are the wrap couplings and the system is
/// solved via Sherman-Morrison.
std::vector<double> tridiagonal_solve(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs,
                                      bool periodic);

}  // namespace l1rom
