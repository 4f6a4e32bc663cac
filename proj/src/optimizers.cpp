// SPDX-License-Identifier: Apache-2.0
#include "hfac/optimizers.hpp"

#include <cmath>
#include <stdexcept>

namespace hfac {

namespace {

void require_step_shapes(const OptimizerState& st, const Matrix& w, const Matrix& g) {
  if (!w.same_shape(g)) throw std::invalid_argument("step: W and G shape mismatch");
  const std::size_t m = w.rows(), n = w.cols();
  if (!st.m.empty() && (st.m.rows() != m || st.m.cols() != n))
    throw std::invalid_argument("step: state M shape mismatch");
  if (!st.v.empty() && (st.v.rows() != m || st.v.cols() != n))
    throw std::invalid_argument("step: state V shape mismatch");
  if (!st.u.empty() && st.u.size() != m) throw std::invalid_argument("step: state u length mismatch");
  if (!st.w.empty() && st.w.size() != n) throw std::invalid_argument("step: state v length mismatch");
  if (!st.r.empty() && st.r.size() != m) throw std::invalid_argument("step: state r length mismatch");
  if (!st.s.empty() && st.s.size() != n) throw std::invalid_argument("step: state s length mismatch");
}

void ema_inplace(Vector& acc, const Vector& x, double decay) {
  for (std::size_t k = 0; k < acc.size(); ++k)
    acc[k] = decay * acc[k] + (1.0 - decay) * x[k];
}

void require_positive_eps(const HyperParams& hp, const char* who) {
  if (hp.eps <= 0.0)
    throw std::invalid_argument(std::string(who) + ": eps must be positive");
}

}  // namespace

Algo parse_algo(const std::string& name) {
  if (name == "gdm") return Algo::kGdm;
  if (name == "signsgd") return Algo::kSignSgd;
  if (name == "signfsgd") return Algo::kSignFsgd;
  if (name == "lion") return Algo::kLion;
  if (name == "lionfactor") return Algo::kLionFactor;
  if (name == "adam") return Algo::kAdam;
  if (name == "adamw") return Algo::kAdamW;
  if (name == "adafactor_m") return Algo::kAdafactorM;
  if (name == "adafactor_no_m") return Algo::kAdafactorNoM;
  if (name == "hfac") return Algo::kHFac;
  throw std::invalid_argument("unknown optimizer: " + name);
}

std::string algo_name(Algo algo) {
  switch (algo) {
    case Algo::kGdm: return "gdm";
    case Algo::kSignSgd: return "signsgd";
    case Algo::kSignFsgd: return "signfsgd";
    case Algo::kLion: return "lion";
    case Algo::kLionFactor: return "lionfactor";
    case Algo::kAdam: return "adam";
    case Algo::kAdamW: return "adamw";
    case Algo::kAdafactorM: return "adafactor_m";
    case Algo::kAdafactorNoM: return "adafactor_no_m";
    case Algo::kHFac: return "hfac";
  }
  throw std::invalid_argument("unknown optimizer enum value");
}

std::vector<Algo> algo_registry() {
  return {Algo::kGdm,      Algo::kSignSgd,    Algo::kSignFsgd,     Algo::kLion,
          Algo::kLionFactor, Algo::kAdam,     Algo::kAdamW,        Algo::kAdafactorM,
          Algo::kAdafactorNoM, Algo::kHFac};
}

void validate_hyper(const HyperParams& hp) {
  if (!(hp.beta1 >= 0.0 && hp.beta1 < 1.0)) throw std::invalid_argument("hyper: beta1 must be in [0,1)");
  if (!(hp.beta2 >= 0.0 && hp.beta2 < 1.0)) throw std::invalid_argument("hyper: beta2 must be in [0,1)");
  if (!(hp.gamma >= 0.0 && hp.gamma < 1.0)) throw std::invalid_argument("hyper: gamma must be in [0,1)");
  if (!(hp.eps >= 0.0)) throw std::invalid_argument("hyper: eps must be >= 0");
  if (!(hp.weight_decay >= 0.0)) throw std::invalid_argument("hyper: weight_decay must be >= 0");
  if (!(hp.clip_threshold > 0.0)) throw std::invalid_argument("hyper: clip_threshold must be > 0");
}

HyperParams default_hyper(Algo algo) {
  HyperParams hp;
  switch (algo) {
    case Algo::kAdam:
    case Algo::kAdamW:
      hp.eps = 1e-8;
      break;
    case Algo::kLion:
    case Algo::kLionFactor:
      hp.beta2 = 0.99;
      break;
    default:
      break;
  }
  return hp;
}

double beta_hat(double beta, std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("beta_hat: t starts at 1");
  if (beta == 0.0) return 0.0;
  return beta * (1.0 - std::pow(beta, static_cast<double>(t - 1))) /
         (1.0 - std::pow(beta, static_cast<double>(t)));
}

OptimizerState init_state(Algo algo, std::size_t rows, std::size_t cols, const HyperParams& hp,
                          const ParamPolicy& policy) {
  validate_hyper(hp);
  if (rows == 0 || cols == 0) throw std::invalid_argument("init_state: empty shape");
  Algo effective = algo;
  if (policy.fullhead) {
    switch (algo) {
      case Algo::kSignFsgd: effective = Algo::kSignSgd; break;
      case Algo::kLionFactor: effective = Algo::kLion; break;
      case Algo::kHFac: effective = Algo::kAdafactorM; break;
      default: break;  // already a full-momentum algorithm
    }
  }
  OptimizerState st;
  st.algo = effective;
  st.t = 1;
  st.ablation = policy.ablation;
  switch (effective) {
    case Algo::kGdm:
    case Algo::kSignSgd:
    case Algo::kLion:
      st.m = Matrix(rows, cols);
      break;
    case Algo::kAdam:
    case Algo::kAdamW:
      st.m = Matrix(rows, cols);
      st.v = Matrix(rows, cols);
      break;
    case Algo::kSignFsgd:
    case Algo::kLionFactor:
      st.u = Vector(rows, 0.0);
      st.w = Vector(cols, 0.0);
      break;
    case Algo::kAdafactorM:
      st.m = Matrix(rows, cols);
      st.r = Vector(rows, 0.0);
      st.s = Vector(cols, 0.0);
      break;
    case Algo::kAdafactorNoM:
      st.r = Vector(rows, 0.0);
      st.s = Vector(cols, 0.0);
      break;
    case Algo::kHFac:
      require_positive_eps(hp, "hfac");
      st.u = Vector(rows, 0.0);
      st.w = Vector(cols, 0.0);
      st.r = Vector(rows, 0.0);
      st.s = Vector(cols, 0.0);
      break;
  }
  return st;
}

Matrix factored_second_moment(const Vector& r, const Vector& s) {
  const double total = sum(r);
  if (!(total > 0.0))
    throw std::invalid_argument(
        "factored_second_moment: sum(r) is not positive (eps=0 with a vanishing gradient)");
  Matrix vhat = outer(r, s);
  vhat *= 1.0 / total;
  return vhat;
}

namespace {

void step_gdm(OptimizerState& st, Matrix& w, const Matrix& g, double lr, const HyperParams& hp) {
  // Heavy-ball accumulation, no (1 - gamma) factor.
  for (std::size_t k = 0; k < st.m.size(); ++k)
    st.m.data()[k] = hp.gamma * st.m.data()[k] + g.data()[k];
  for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] -= lr * st.m.data()[k];
}

void step_signsgd(OptimizerState& st, Matrix& w, const Matrix& g, double lr,
                  const HyperParams& hp) {
  if (hp.beta1 > 0.0) {
    for (std::size_t k = 0; k < st.m.size(); ++k)
      st.m.data()[k] = hp.beta1 * st.m.data()[k] + (1.0 - hp.beta1) * g.data()[k];
    for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] -= lr * sign(st.m.data()[k]);
  } else {
    for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] -= lr * sign(g.data()[k]);
  }
}

void step_adam(OptimizerState& st, Matrix& w, const Matrix& g, double lr, const HyperParams& hp,
               bool decoupled_decay) {
  const double h1 = beta_hat(hp.beta1, st.t);
  const double h2 = beta_hat(hp.beta2, st.t);
  for (std::size_t k = 0; k < w.size(); ++k) {
    st.m.data()[k] = h1 * st.m.data()[k] + (1.0 - h1) * g.data()[k];
    st.v.data()[k] = h2 * st.v.data()[k] + (1.0 - h2) * g.data()[k] * g.data()[k];
    double upd = st.m.data()[k] / (std::sqrt(st.v.data()[k]) + hp.eps);
    if (decoupled_decay) upd += hp.weight_decay * w.data()[k];
    w.data()[k] -= lr * upd;
  }
}

void step_adafactor(OptimizerState& st, Matrix& w, const Matrix& g, double lr,
                    const HyperParams& hp, bool with_momentum) {
  const double h1 = beta_hat(hp.beta1, st.t);
  const double h2 = beta_hat(hp.beta2, st.t);
  ema_inplace(st.r, row_sum_sq(g, hp.eps), h2);
  ema_inplace(st.s, col_sum_sq(g, hp.eps), h2);
  const Matrix vhat = factored_second_moment(st.r, st.s);
  Matrix upd(w.rows(), w.cols());
  if (with_momentum) {
    for (std::size_t k = 0; k < st.m.size(); ++k)
      st.m.data()[k] = h1 * st.m.data()[k] + (1.0 - h1) * g.data()[k];
    for (std::size_t k = 0; k < upd.size(); ++k)
      upd.data()[k] = st.m.data()[k] / std::sqrt(vhat.data()[k]);
  } else {
    for (std::size_t k = 0; k < upd.size(); ++k)
      upd.data()[k] = g.data()[k] / std::sqrt(vhat.data()[k]);
  }
  const Matrix clipped = clip_update(upd, hp.clip_threshold);
  for (std::size_t k = 0; k < w.size(); ++k)
    w.data()[k] -= lr * (clipped.data()[k] + hp.weight_decay * w.data()[k]);
}

void step_signfsgd(OptimizerState& st, Matrix& w, const Matrix& g, double lr,
                   const HyperParams& hp) {
  const std::size_t m = w.rows(), n = w.cols();
  const Vector rm = row_mean(g);
  const Vector cm = col_mean(g);
  ema_inplace(st.u, rm, hp.beta1);
  ema_inplace(st.w, cm, hp.beta1);
  // Corrected terms; the ablation variant keeps the raw accumulators.
  Vector uh = st.u, vh = st.w;
  if (!st.ablation) {
    for (std::size_t i = 0; i < m; ++i) uh[i] -= rm[i];
    for (std::size_t j = 0; j < n; ++j) vh[j] -= cm[j];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double row_term = sign(hp.beta1 * uh[i] + g(i, j));
      const double col_term = sign(hp.beta1 * vh[j] + g(i, j));
      w(i, j) -= lr * (row_term + col_term + hp.weight_decay * w(i, j));
    }
}

void step_lion(OptimizerState& st, Matrix& w, const Matrix& g, double lr, const HyperParams& hp) {
  // Update from the pre-update moment, EMA storage afterwards (double-beta).
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double c = hp.beta1 * st.m.data()[k] + (1.0 - hp.beta1) * g.data()[k];
    w.data()[k] -= lr * (sign(c) + hp.weight_decay * w.data()[k]);
  }
  for (std::size_t k = 0; k < st.m.size(); ++k)
    st.m.data()[k] = hp.beta2 * st.m.data()[k] + (1.0 - hp.beta2) * g.data()[k];
}

void step_lionfactor(OptimizerState& st, Matrix& w, const Matrix& g, double lr,
                     const HyperParams& hp) {
  const std::size_t m = w.rows(), n = w.cols();
  const Vector rm = row_mean(g);
  const Vector cm = col_mean(g);
  // Blend with beta1 for the update (entering the sign un-multiplied), then
  // store the EMA with beta2 after the parameter update.
  Vector uh(m), vh(n);
  for (std::size_t i = 0; i < m; ++i) {
    uh[i] = hp.beta1 * st.u[i] + (1.0 - hp.beta1) * rm[i];
    if (!st.ablation) uh[i] -= rm[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    vh[j] = hp.beta1 * st.w[j] + (1.0 - hp.beta1) * cm[j];
    if (!st.ablation) vh[j] -= cm[j];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double row_term = sign(uh[i] + g(i, j));
      const double col_term = sign(vh[j] + g(i, j));
      w(i, j) -= lr * (row_term + col_term + hp.weight_decay * w(i, j));
    }
  ema_inplace(st.u, rm, hp.beta2);
  ema_inplace(st.w, cm, hp.beta2);
}

void step_hfac(OptimizerState& st, Matrix& w, const Matrix& g, double lr, const HyperParams& hp) {
  require_positive_eps(hp, "hfac");
  const std::size_t m = w.rows(), n = w.cols();
  const double h1 = beta_hat(hp.beta1, st.t);
  const double h2 = beta_hat(hp.beta2, st.t);
  const Vector rm = row_mean(g);
  const Vector cm = col_mean(g);
  // All accumulators advance first; the normalizers below read the
  // post-update values.
  ema_inplace(st.u, rm, h1);
  ema_inplace(st.w, cm, h1);
  ema_inplace(st.r, row_sum_sq(g, hp.eps), h2);
  ema_inplace(st.s, col_sum_sq(g, hp.eps), h2);
  Vector phi(m), psi(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double centered = st.ablation ? st.u[i] : st.u[i] - rm[i];
    phi[i] = h1 * centered / std::sqrt(st.r[i] / static_cast<double>(n));
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double centered = st.ablation ? st.w[j] : st.w[j] - cm[j];
    psi[j] = h1 * centered / std::sqrt(st.s[j] / static_cast<double>(m));
  }
  const Matrix vhat = factored_second_moment(st.r, st.s);
  Matrix normalized(m, n);
  for (std::size_t k = 0; k < normalized.size(); ++k)
    normalized.data()[k] = g.data()[k] / std::sqrt(vhat.data()[k]);
  const Matrix clipped = clip_update(normalized, hp.clip_threshold);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      w(i, j) -= lr * (0.5 * (phi[i] + psi[j]) + clipped(i, j) + hp.weight_decay * w(i, j));
}

}  // namespace

void step(OptimizerState& st, Matrix& w, const Matrix& g, double lr, const HyperParams& hp) {
  validate_hyper(hp);
  require_step_shapes(st, w, g);
  switch (st.algo) {
    case Algo::kGdm: step_gdm(st, w, g, lr, hp); break;
    case Algo::kSignSgd: step_signsgd(st, w, g, lr, hp); break;
    case Algo::kSignFsgd: step_signfsgd(st, w, g, lr, hp); break;
    case Algo::kLion: step_lion(st, w, g, lr, hp); break;
    case Algo::kLionFactor: step_lionfactor(st, w, g, lr, hp); break;
    case Algo::kAdam: step_adam(st, w, g, lr, hp, false); break;
    case Algo::kAdamW: step_adam(st, w, g, lr, hp, true); break;
    case Algo::kAdafactorM: step_adafactor(st, w, g, lr, hp, true); break;
    case Algo::kAdafactorNoM: step_adafactor(st, w, g, lr, hp, false); break;
    case Algo::kHFac: step_hfac(st, w, g, lr, hp); break;
  }
  ++st.t;
}

std::size_t state_element_count(Algo algo, std::size_t rows, std::size_t cols) {
  const std::size_t mn = rows * cols;
  const std::size_t mpn = rows + cols;
  switch (algo) {
    case Algo::kGdm:
    case Algo::kSignSgd:
    case Algo::kLion:
      return mn;
    case Algo::kAdam:
    case Algo::kAdamW:
      return 2 * mn;
    case Algo::kSignFsgd:
    case Algo::kLionFactor:
      return mpn;
    case Algo::kAdafactorM:
      return mn + mpn;
    case Algo::kAdafactorNoM:
      return mpn;
    case Algo::kHFac:
      return 2 * mpn;
  }
  throw std::invalid_argument("unknown optimizer enum value");
}

std::size_t state_element_count(const OptimizerState& st) {
  return st.m.size() + st.v.size() + st.u.size() + st.w.size() + st.r.size() + st.s.size();
}

}  // namespace hfac
