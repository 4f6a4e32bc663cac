// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hfac {

using Vector = std::vector<double>;

// Dense row-major real matrix; the universal carrier for parameters,
// gradients, and full moment accumulators.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double c);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector data_;
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double c, Matrix a);

// Entrywise product / quotient / square root.
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix divide(const Matrix& a, const Matrix& b);
Matrix sqrt_entries(const Matrix& a);

// Reductions.
double sum(const Matrix& a);
double frobenius_norm(const Matrix& a);
double rms(const Matrix& a);
double max_abs(const Matrix& a);

// Row/column statistics. row_mean has length rows; col_mean length cols.
Vector row_mean(const Matrix& g);
Vector col_mean(const Matrix& g);
// Accumulator seeds: result[i] = sum_j (g(i,j)^2 + eps), and the transpose analogue.
Vector row_sum_sq(const Matrix& g, double eps);
Vector col_sum_sq(const Matrix& g, double eps);

// Update capping: U / max(1, rms(U)/d). Identity when rms(U) <= d.
Matrix clip_update(const Matrix& u, double d);

// Entrywise sign with sign(0) = 0.
double sign(double x);
Matrix sign(const Matrix& u);

// Outer product u v^T (rows = u.size(), cols = v.size()).
Matrix outer(const Vector& u, const Vector& v);
// Broadcast helpers: u 1_n^T (column vector repeated across cols) and 1_m v^T.
Matrix broadcast_col(const Vector& u, std::size_t cols);
Matrix broadcast_row(const Vector& v, std::size_t rows);

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);

// Vector helpers used by the factored accumulators.
double sum(const Vector& v);
double dot(const Vector& a, const Vector& b);
double norm_sq(const Vector& v);

}  // namespace hfac
