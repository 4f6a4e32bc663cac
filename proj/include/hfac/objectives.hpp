// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hfac/matrix.hpp"
#include "hfac/rng.hpp"

namespace hfac {

using Shape = std::pair<std::size_t, std::size_t>;

// A differentiable benchmark problem over one or more matrix parameters.
// Losses are finite and bounded below for finite inputs; gradients are
// analytic and validated against central finite differences.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual Shape param_shape(std::size_t p) const = 0;
  virtual double loss(std::span<const Matrix> params) const = 0;
  virtual std::vector<Matrix> grad(std::span<const Matrix> params) const = 0;
  virtual std::vector<Matrix> initial_params(Rng& rng) const = 0;

  // Single-parameter conveniences; throw invalid_argument when param_count() != 1.
  double loss(const Matrix& w) const;
  Matrix grad(const Matrix& w) const;
};

// f(W) = 1/2 * sum_ij q_ij (W_ij - T_ij)^2 with q_ij drawn from
// U[q_lo, q_hi] (default [0.5, 3]) and target T drawn from N(0, 1), both
// fixed by the seed.
class DiagQuadratic final : public Objective {
 public:
  DiagQuadratic(std::size_t rows, std::size_t cols, std::uint64_t seed, double q_lo = 0.5,
                double q_hi = 3.0);
  // Explicit curvatures and target, for closed-form instances.
  DiagQuadratic(Matrix q, Matrix target);

  std::string name() const override { return "diag_quadratic"; }
  std::size_t param_count() const override { return 1; }
  Shape param_shape(std::size_t p) const override;
  double loss(std::span<const Matrix> params) const override;
  std::vector<Matrix> grad(std::span<const Matrix> params) const override;
  std::vector<Matrix> initial_params(Rng& rng) const override;

  const Matrix& curvature() const { return q_; }
  const Matrix& target() const { return target_; }

  using Objective::grad;
  using Objective::loss;

 private:
  Matrix q_, target_;
};

// Per row, summed over adjacent column pairs: 100 (W[i,j+1] - W[i,j]^2)^2
// + (1 - W[i,j])^2. Minimum 0 at the all-ones matrix. Requires cols >= 2.
class MatrixRosenbrock final : public Objective {
 public:
  MatrixRosenbrock(std::size_t rows, std::size_t cols);

  std::string name() const override { return "matrix_rosenbrock"; }
  std::size_t param_count() const override { return 1; }
  Shape param_shape(std::size_t p) const override;
  double loss(std::span<const Matrix> params) const override;
  std::vector<Matrix> grad(std::span<const Matrix> params) const override;
  std::vector<Matrix> initial_params(Rng& rng) const override;

  using Objective::grad;
  using Objective::loss;

 private:
  std::size_t rows_, cols_;
};

// Two-class logistic regression: 32 points in R^6 made linearly separable by
// a margin shift along the seeded true direction; weights are a 6x1 matrix,
// so the column-side factorization degenerates to scalars. Loss is the mean
// of softplus(-y * x^T w); at w = 0 it equals ln 2.
class LogisticRegression final : public Objective {
 public:
  explicit LogisticRegression(std::uint64_t seed);

  std::string name() const override { return "logistic_regression"; }
  std::size_t param_count() const override { return 1; }
  Shape param_shape(std::size_t p) const override;
  double loss(std::span<const Matrix> params) const override;
  std::vector<Matrix> grad(std::span<const Matrix> params) const override;
  std::vector<Matrix> initial_params(Rng& rng) const override;

  static constexpr std::size_t kPoints = 32;
  static constexpr std::size_t kDim = 6;

  using Objective::grad;
  using Objective::loss;

 private:
  Matrix x_;    // kPoints x kDim
  Vector y_;    // labels in {-1, +1}
};

// 4 -> 8 (tanh) -> 3 (softmax cross-entropy) network fit to argmax labels of
// a seeded teacher network on 64 fixed inputs. Two matrix parameters: W1
// (4x8) and W2 (8x3); gradients by manual backprop.
class TwoLayerMlp final : public Objective {
 public:
  explicit TwoLayerMlp(std::uint64_t seed);

  std::string name() const override { return "two_layer_mlp"; }
  std::size_t param_count() const override { return 2; }
  Shape param_shape(std::size_t p) const override;
  double loss(std::span<const Matrix> params) const override;
  std::vector<Matrix> grad(std::span<const Matrix> params) const override;
  std::vector<Matrix> initial_params(Rng& rng) const override;

  static constexpr std::size_t kPoints = 64;
  static constexpr std::size_t kIn = 4;
  static constexpr std::size_t kHidden = 8;
  static constexpr std::size_t kOut = 3;

 private:
  Matrix forward(std::span<const Matrix> params, Matrix& hidden, Matrix& probs) const;

  Matrix x_;                        // kPoints x kIn
  std::vector<std::size_t> labels_; // argmax of teacher logits
};

// Factory for the registry used by the experiment harness and the CLI.
// Kinds: diag_quadratic, matrix_rosenbrock, logistic_regression, two_layer_mlp.
std::unique_ptr<Objective> make_objective(const std::string& kind, std::size_t rows,
                                          std::size_t cols, std::uint64_t seed);
// True when the kind takes an explicit rows x cols shape (the other kinds fix
// their own shapes and reject one).
bool objective_takes_shape(const std::string& kind);
std::vector<std::string> objective_kinds();

// Stationary stochastic gradient source: sample(t) = mean + sigma * Z_t with
// Z_t i.i.d. standard normal, seeded per step index so the stream is
// deterministic and randomly accessible.
class StochasticOracle {
 public:
  StochasticOracle(Matrix mean_grad, double noise_scale, std::uint64_t seed);

  Matrix sample(std::uint64_t t) const;
  const Matrix& mean() const { return mean_; }
  double noise_scale() const { return sigma_; }

 private:
  Matrix mean_;
  double sigma_;
  std::uint64_t seed_;
};

// Central finite differences (f(W + h E_ij) - f(W - h E_ij)) / 2h per entry,
// per parameter; the oracle behind every gradient check.
std::vector<Matrix> finite_diff_grad(const Objective& obj, std::span<const Matrix> params,
                                     double h);

}  // namespace hfac
