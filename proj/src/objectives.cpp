// SPDX-License-Identifier: Apache-2.0
#include "hfac/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hfac {

namespace {

void require_param_count(const Objective& obj, std::span<const Matrix> params) {
  if (params.size() != obj.param_count())
    throw std::invalid_argument(obj.name() + ": expected " + std::to_string(obj.param_count()) +
                                " parameter matrices, got " + std::to_string(params.size()));
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto [r, c] = obj.param_shape(p);
    if (params[p].rows() != r || params[p].cols() != c)
      throw std::invalid_argument(obj.name() + ": parameter " + std::to_string(p) +
                                  " has wrong shape");
  }
}

// softplus(z) = log(1 + e^z), computed without overflow.
double softplus(double z) { return std::log1p(std::exp(-std::fabs(z))) + std::max(z, 0.0); }

Matrix random_normal(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = stddev * rng.normal();
  return out;
}

}  // namespace

double Objective::loss(const Matrix& w) const {
  if (param_count() != 1)
    throw std::invalid_argument(name() + ": single-matrix loss() needs param_count() == 1");
  return loss(std::span<const Matrix>(&w, 1));
}

Matrix Objective::grad(const Matrix& w) const {
  if (param_count() != 1)
    throw std::invalid_argument(name() + ": single-matrix grad() needs param_count() == 1");
  return grad(std::span<const Matrix>(&w, 1))[0];
}

// ---------------------------------------------------------------- DiagQuadratic

DiagQuadratic::DiagQuadratic(std::size_t rows, std::size_t cols, std::uint64_t seed, double q_lo,
                             double q_hi) {
  if (!(0.0 < q_lo && q_lo <= q_hi))
    throw std::invalid_argument("diag_quadratic: need 0 < q_lo <= q_hi");
  q_ = Matrix(rows, cols);
  target_ = Matrix(rows, cols);
  Rng rng(seed);
  for (std::size_t k = 0; k < q_.size(); ++k) q_.data()[k] = rng.uniform(q_lo, q_hi);
  for (std::size_t k = 0; k < target_.size(); ++k) target_.data()[k] = rng.normal();
}

DiagQuadratic::DiagQuadratic(Matrix q, Matrix target) : q_(std::move(q)), target_(std::move(target)) {
  if (q_.rows() != target_.rows() || q_.cols() != target_.cols())
    throw std::invalid_argument("diag_quadratic: q and target shapes differ");
  for (std::size_t k = 0; k < q_.size(); ++k)
    if (!(q_.data()[k] > 0.0)) throw std::invalid_argument("diag_quadratic: curvatures must be positive");
}

Shape DiagQuadratic::param_shape(std::size_t p) const {
  if (p != 0) throw std::invalid_argument("diag_quadratic: parameter index out of range");
  return {q_.rows(), q_.cols()};
}

double DiagQuadratic::loss(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = w.data()[k] - target_.data()[k];
    acc += q_.data()[k] * d * d;
  }
  return 0.5 * acc;
}

std::vector<Matrix> DiagQuadratic::grad(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  Matrix g(w.rows(), w.cols());
  for (std::size_t k = 0; k < w.size(); ++k)
    g.data()[k] = q_.data()[k] * (w.data()[k] - target_.data()[k]);
  return {std::move(g)};
}

std::vector<Matrix> DiagQuadratic::initial_params(Rng& rng) const {
  Matrix w = target_;
  for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] += rng.normal();
  return {std::move(w)};
}

// ------------------------------------------------------------- MatrixRosenbrock

MatrixRosenbrock::MatrixRosenbrock(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 2)
    throw std::invalid_argument("matrix_rosenbrock: needs rows >= 1 and cols >= 2");
}

Shape MatrixRosenbrock::param_shape(std::size_t p) const {
  if (p != 0) throw std::invalid_argument("matrix_rosenbrock: parameter index out of range");
  return {rows_, cols_};
}

double MatrixRosenbrock::loss(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j + 1 < cols_; ++j) {
      const double a = w(i, j + 1) - w(i, j) * w(i, j);
      const double b = 1.0 - w(i, j);
      acc += 100.0 * a * a + b * b;
    }
  return acc;
}

std::vector<Matrix> MatrixRosenbrock::grad(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  Matrix g(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j + 1 < cols_; ++j) {
      const double a = w(i, j + 1) - w(i, j) * w(i, j);
      g(i, j) += -400.0 * w(i, j) * a - 2.0 * (1.0 - w(i, j));
      g(i, j + 1) += 200.0 * a;
    }
  return {std::move(g)};
}

std::vector<Matrix> MatrixRosenbrock::initial_params(Rng& rng) const {
  Matrix w(rows_, cols_);
  for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-0.5, 1.5);
  return {std::move(w)};
}

// ----------------------------------------------------------- LogisticRegression

LogisticRegression::LogisticRegression(std::uint64_t seed)
    : x_(kPoints, kDim), y_(kPoints, 0.0) {
  Rng rng(seed);
  Vector wstar(kDim, 0.0);
  double nrm = 0.0;
  for (double& c : wstar) {
    c = rng.normal();
    nrm += c * c;
  }
  nrm = std::sqrt(nrm);
  for (double& c : wstar) c /= nrm;
  for (std::size_t k = 0; k < x_.size(); ++k) x_.data()[k] = rng.normal();
  for (std::size_t i = 0; i < kPoints; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) z += x_(i, j) * wstar[j];
    y_[i] = z >= 0.0 ? 1.0 : -1.0;
    // Shift each point 0.3 along its label's side of the separator so the
    // problem has a strict margin and a finite-loss solution direction.
    for (std::size_t j = 0; j < kDim; ++j) x_(i, j) += 0.3 * y_[i] * wstar[j];
  }
}

Shape LogisticRegression::param_shape(std::size_t p) const {
  if (p != 0) throw std::invalid_argument("logistic_regression: parameter index out of range");
  return {kDim, 1};
}

double LogisticRegression::loss(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < kPoints; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) z += x_(i, j) * w(j, 0);
    acc += softplus(-y_[i] * z);
  }
  return acc / static_cast<double>(kPoints);
}

std::vector<Matrix> LogisticRegression::grad(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  const Matrix& w = params[0];
  Matrix g(kDim, 1);
  for (std::size_t i = 0; i < kPoints; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) z += x_(i, j) * w(j, 0);
    const double margin = y_[i] * z;
    // d/dz softplus(-z) = -sigmoid(-z), computed stably for both signs.
    const double sig = 1.0 / (1.0 + std::exp(margin));
    for (std::size_t j = 0; j < kDim; ++j) g(j, 0) -= y_[i] * sig * x_(i, j);
  }
  g *= 1.0 / static_cast<double>(kPoints);
  return {std::move(g)};
}

std::vector<Matrix> LogisticRegression::initial_params(Rng& rng) const {
  return {random_normal(rng, kDim, 1, 0.25)};
}

// ------------------------------------------------------------------ TwoLayerMlp

TwoLayerMlp::TwoLayerMlp(std::uint64_t seed) : x_(kPoints, kIn) {
  Rng rng(seed);
  Matrix w1t = random_normal(rng, kIn, kHidden, 1.0);
  Matrix w2t = random_normal(rng, kHidden, kOut, 1.0);
  for (std::size_t k = 0; k < x_.size(); ++k) x_.data()[k] = rng.normal();
  Matrix h = matmul(x_, w1t);
  for (std::size_t k = 0; k < h.size(); ++k) h.data()[k] = std::tanh(h.data()[k]);
  const Matrix logits = matmul(h, w2t);
  labels_.resize(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < kOut; ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    labels_[i] = best;
  }
}

Shape TwoLayerMlp::param_shape(std::size_t p) const {
  if (p == 0) return {kIn, kHidden};
  if (p == 1) return {kHidden, kOut};
  throw std::invalid_argument("two_layer_mlp: parameter index out of range");
}

Matrix TwoLayerMlp::forward(std::span<const Matrix> params, Matrix& hidden,
                            Matrix& probs) const {
  hidden = matmul(x_, params[0]);
  for (std::size_t k = 0; k < hidden.size(); ++k) hidden.data()[k] = std::tanh(hidden.data()[k]);
  Matrix logits = matmul(hidden, params[1]);
  probs = logits;
  for (std::size_t i = 0; i < kPoints; ++i) {
    double mx = probs(i, 0);
    for (std::size_t j = 1; j < kOut; ++j) mx = std::max(mx, probs(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < kOut; ++j) {
      probs(i, j) = std::exp(probs(i, j) - mx);
      z += probs(i, j);
    }
    for (std::size_t j = 0; j < kOut; ++j) probs(i, j) /= z;
  }
  return logits;
}

double TwoLayerMlp::loss(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  Matrix hidden, probs;
  forward(params, hidden, probs);
  double acc = 0.0;
  for (std::size_t i = 0; i < kPoints; ++i)
    acc -= std::log(probs(i, labels_[i]) + 1e-300);
  return acc / static_cast<double>(kPoints);
}

std::vector<Matrix> TwoLayerMlp::grad(std::span<const Matrix> params) const {
  require_param_count(*this, params);
  Matrix hidden, probs;
  forward(params, hidden, probs);
  Matrix dlogits = probs;
  for (std::size_t i = 0; i < kPoints; ++i) dlogits(i, labels_[i]) -= 1.0;
  dlogits *= 1.0 / static_cast<double>(kPoints);
  Matrix g2 = matmul(transpose(hidden), dlogits);
  Matrix dhidden = matmul(dlogits, transpose(params[1]));
  for (std::size_t k = 0; k < dhidden.size(); ++k)
    dhidden.data()[k] *= 1.0 - hidden.data()[k] * hidden.data()[k];
  Matrix g1 = matmul(transpose(x_), dhidden);
  return {std::move(g1), std::move(g2)};
}

std::vector<Matrix> TwoLayerMlp::initial_params(Rng& rng) const {
  // 1/sqrt(fan-in) keeps the tanh units out of saturation at the start.
  Matrix w1 = random_normal(rng, kIn, kHidden, 1.0 / std::sqrt(static_cast<double>(kIn)));
  Matrix w2 = random_normal(rng, kHidden, kOut, 1.0 / std::sqrt(static_cast<double>(kHidden)));
  return {std::move(w1), std::move(w2)};
}

// ---------------------------------------------------------------------- factory

std::unique_ptr<Objective> make_objective(const std::string& kind, std::size_t rows,
                                          std::size_t cols, std::uint64_t seed) {
  if (kind == "diag_quadratic") return std::make_unique<DiagQuadratic>(rows, cols, seed);
  if (kind == "matrix_rosenbrock") return std::make_unique<MatrixRosenbrock>(rows, cols);
  if (kind == "logistic_regression") return std::make_unique<LogisticRegression>(seed);
  if (kind == "two_layer_mlp") return std::make_unique<TwoLayerMlp>(seed);
  throw std::invalid_argument("unknown objective kind: " + kind);
}

bool objective_takes_shape(const std::string& kind) {
  return kind == "diag_quadratic" || kind == "matrix_rosenbrock";
}

std::vector<std::string> objective_kinds() {
  return {"diag_quadratic", "matrix_rosenbrock", "logistic_regression", "two_layer_mlp"};
}

// ------------------------------------------------------------- StochasticOracle

StochasticOracle::StochasticOracle(Matrix mean_grad, double noise_scale, std::uint64_t seed)
    : mean_(std::move(mean_grad)), sigma_(noise_scale), seed_(seed) {
  if (sigma_ < 0.0) throw std::invalid_argument("StochasticOracle: noise scale must be >= 0");
  if (mean_.empty()) throw std::invalid_argument("StochasticOracle: empty mean gradient");
}

Matrix StochasticOracle::sample(std::uint64_t t) const {
  Matrix g = mean_;
  if (sigma_ == 0.0) return g;
  Rng rng(mix_seed(seed_, t));
  for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += sigma_ * rng.normal();
  return g;
}

// -------------------------------------------------------------- finite_diff_grad

std::vector<Matrix> finite_diff_grad(const Objective& obj, std::span<const Matrix> params,
                                     double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
  std::vector<Matrix> shifted(params.begin(), params.end());
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix g(params[p].rows(), params[p].cols());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double saved = shifted[p].data()[k];
      shifted[p].data()[k] = saved + h;
      const double fp = obj.loss(std::span<const Matrix>(shifted.data(), shifted.size()));
      shifted[p].data()[k] = saved - h;
      const double fm = obj.loss(std::span<const Matrix>(shifted.data(), shifted.size()));
      shifted[p].data()[k] = saved;
      g.data()[k] = (fp - fm) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace hfac
