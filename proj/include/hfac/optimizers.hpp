// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfac/matrix.hpp"

namespace hfac {

enum class Algo {
  kGdm,
  kSignSgd,
  kSignFsgd,
  kLion,
  kLionFactor,
  kAdam,
  kAdamW,
  kAdafactorM,
  kAdafactorNoM,
  kHFac,
};

Algo parse_algo(const std::string& name);
std::string algo_name(Algo algo);
std::vector<Algo> algo_registry();

struct HyperParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-30;
  double weight_decay = 0.0;   // decoupled lambda
  double clip_threshold = 1.0; // d
  double gamma = 0.9;          // heavy-ball friction analogue for GDm
};

// beta1/beta2/gamma in [0,1), eps >= 0, weight_decay >= 0, clip_threshold > 0.
void validate_hyper(const HyperParams& hp);
// Family defaults: eps = 1e-8 for Adam/AdamW, 1e-30 for the factored family;
// beta2 = 0.99 for the Lion family, 0.999 otherwise.
HyperParams default_hyper(Algo algo);

struct ParamPolicy {
  // Replace factored momentum with the sibling full-momentum algorithm for
  // this parameter (signFSGD -> signSGD with momentum, LionFactor -> Lion,
  // H-Fac -> Adafactor with momentum).
  bool fullhead = false;
  // Disable the corrected terms (the row/column-mean subtraction).
  bool ablation = false;
};

// Per-parameter accumulator bundle. Only the containers the algorithm uses
// are allocated; `algo` is the effective algorithm after the fullhead policy.
struct OptimizerState {
  Algo algo = Algo::kGdm;
  std::uint64_t t = 1;  // step counter, starts at 1
  bool ablation = false;
  Matrix m;   // full first moment
  Matrix v;   // full second moment
  Vector u;   // factored first moment, row side (length m)
  Vector w;   // factored first moment, column side (length n)
  Vector r;   // factored second moment, row side (length m)
  Vector s;   // factored second moment, column side (length n)
};

// Bias-corrected decay: beta (1 - beta^(t-1)) / (1 - beta^t); 0 at t = 1,
// increasing toward beta.
double beta_hat(double beta, std::uint64_t t);

OptimizerState init_state(Algo algo, std::size_t rows, std::size_t cols, const HyperParams& hp,
                          const ParamPolicy& policy = {});

// Advances one optimizer step in place: updates the accumulators and the
// parameter matrix. Throws invalid_argument on shape/hyper errors and
// domain_error when a normalizer loses positivity.
void step(OptimizerState& state, Matrix& w, const Matrix& g, double lr, const HyperParams& hp);

// Memory table: optimizer state elements for an m x n parameter.
std::size_t state_element_count(Algo algo, std::size_t rows, std::size_t cols);
// Elements actually allocated inside a state (matches the table for states
// built by init_state without fullhead).
std::size_t state_element_count(const OptimizerState& state);

// V-hat = r s^T / (1^T r), the factored second-moment reconstruction shared
// by Adafactor and H-Fac. Throws invalid_argument when sum(r) <= 0 (happens
// only with eps = 0 on an all-zero gradient).
Matrix factored_second_moment(const Vector& r, const Vector& s);

}  // namespace hfac
