// SPDX-License-Identifier: Apache-2.0
#include "hfac/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hfac {

namespace {

[[noreturn]] void shape_error(const char* op) {
  throw std::invalid_argument(std::string(op) + ": matrix shape mismatch");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) shape_error(op);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: rows and cols must be positive");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw std::invalid_argument("Matrix::from_rows: empty");
  const std::size_t n = rows.begin()->size();
  Matrix out(rows.size(), n);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != n) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double x : r) out(i, j++) = x;
    ++i;
  }
  return out;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double c) {
  for (double& x : data_) x *= c;
  return *this;
}

bool operator==(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double c, Matrix a) { return a *= c; }

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= b.data()[k];
  return out;
}

Matrix divide(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "divide");
  Matrix out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] /= b.data()[k];
  return out;
}

Matrix sqrt_entries(const Matrix& a) {
  Matrix out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = std::sqrt(out.data()[k]);
  return out;
}

double sum(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.data()[k];
  return acc;
}

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.data()[k] * a.data()[k];
  return std::sqrt(acc);
}

double rms(const Matrix& a) {
  if (a.empty()) throw std::invalid_argument("rms: empty matrix");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.data()[k] * a.data()[k];
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a.data()[k]));
  return m;
}

Vector row_mean(const Matrix& g) {
  if (g.empty()) throw std::invalid_argument("row_mean: empty matrix");
  Vector out(g.rows(), 0.0);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j);
    out[i] = acc / static_cast<double>(g.cols());
  }
  return out;
}

Vector col_mean(const Matrix& g) {
  if (g.empty()) throw std::invalid_argument("col_mean: empty matrix");
  Vector out(g.cols(), 0.0);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) out[j] += g(i, j);
  for (double& x : out) x /= static_cast<double>(g.rows());
  return out;
}

Vector row_sum_sq(const Matrix& g, double eps) {
  if (eps < 0.0) throw std::invalid_argument("row_sum_sq: eps must be nonnegative");
  Vector out(g.rows(), 0.0);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * g(i, j) + eps;
    out[i] = acc;
  }
  return out;
}

Vector col_sum_sq(const Matrix& g, double eps) {
  if (eps < 0.0) throw std::invalid_argument("col_sum_sq: eps must be nonnegative");
  Vector out(g.cols(), 0.0);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) out[j] += g(i, j) * g(i, j) + eps;
  return out;
}

Matrix clip_update(const Matrix& u, double d) {
  if (d <= 0.0) throw std::invalid_argument("clip_update: d must be positive");
  const double scale = 1.0 / std::max(1.0, rms(u) / d);
  Matrix out = u;
  out *= scale;
  return out;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Matrix sign(const Matrix& u) {
  Matrix out = u;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = sign(out.data()[k]);
  return out;
}

Matrix outer(const Vector& u, const Vector& v) {
  Matrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
  return out;
}

Matrix broadcast_col(const Vector& u, std::size_t cols) {
  Matrix out(u.size(), cols);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = u[i];
  return out;
}

Matrix broadcast_row(const Vector& v, std::size_t rows) {
  Matrix out(rows, v.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = v[j];
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

double sum(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double norm_sq(const Vector& v) { return dot(v, v); }

}  // namespace hfac
