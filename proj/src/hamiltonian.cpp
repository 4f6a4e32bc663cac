// SPDX-License-Identifier: Apache-2.0
#include "hfac/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace hfac {

namespace {

void require_single_param(const Objective& obj) {
  if (obj.param_count() != 1)
    throw std::invalid_argument("flows operate on single-matrix objectives; got " + obj.name());
}

void require_positive(const Vector& x, const char* who) {
  for (double c : x)
    if (!(c > 0.0)) throw std::domain_error(std::string(who) + ": r/s entries must stay positive");
}

// Structural requirements only; the descent sufficient conditions live in
// validate_flow_params so the checker can still integrate a violating system
// (the negative control needs to observe a failure, not be refused one).
void validate_basic(Flow flow, const FlowParams& fp) {
  if (!(fp.alpha > 0.0)) throw std::invalid_argument("flow: alpha must be positive");
  if (!(fp.warm_eps >= 0.0)) throw std::invalid_argument("flow: warm_eps must be >= 0");
  if ((flow == Flow::kAdafactor || flow == Flow::kHFac) && !(fp.beta > 0.0))
    throw std::invalid_argument("flow: beta must be positive");
  if (flow == Flow::kFacFirst && !(fp.beta_weight > 0.0 && fp.beta_weight < 1.0))
    throw std::invalid_argument("facfirst flow needs beta_weight in (0,1)");
}

}  // namespace

Flow parse_flow(const std::string& name) {
  if (name == "gdm") return Flow::kGdm;
  if (name == "adafactor") return Flow::kAdafactor;
  if (name == "facfirst") return Flow::kFacFirst;
  if (name == "hfac") return Flow::kHFac;
  throw std::invalid_argument("unknown flow: " + name);
}

std::string flow_name(Flow flow) {
  switch (flow) {
    case Flow::kGdm: return "gdm";
    case Flow::kAdafactor: return "adafactor";
    case Flow::kFacFirst: return "facfirst";
    case Flow::kHFac: return "hfac";
  }
  throw std::invalid_argument("unknown flow enum value");
}

void validate_flow_params(Flow flow, const FlowParams& fp) {
  validate_basic(flow, fp);
  if (flow == Flow::kAdafactor && fp.beta > 2.0 * fp.alpha + 1e-12)
    throw std::invalid_argument("adafactor flow needs beta <= 2 alpha");
  if (flow == Flow::kHFac && fp.beta > 4.0 * fp.alpha + 1e-12)
    throw std::invalid_argument("hfac flow needs beta <= 4 alpha");
}

FlowState flow_init(Flow flow, const Objective& obj, const Matrix& w0, const FlowParams& fp) {
  require_single_param(obj);
  validate_basic(flow, fp);
  const auto [m, n] = obj.param_shape(0);
  if (w0.rows() != m || w0.cols() != n)
    throw std::invalid_argument("flow_init: W0 shape does not match the objective");
  FlowState st;
  st.w = w0;
  switch (flow) {
    case Flow::kGdm:
      st.m = Matrix(m, n);
      break;
    case Flow::kAdafactor: {
      st.m = Matrix(m, n);
      const Matrix g0 = obj.grad(w0);
      st.r = row_sum_sq(g0, fp.warm_eps);
      st.s = col_sum_sq(g0, fp.warm_eps);
      break;
    }
    case Flow::kFacFirst:
      st.u = Vector(m, 0.0);
      st.v = Vector(n, 0.0);
      break;
    case Flow::kHFac: {
      st.u = Vector(m, 0.0);
      st.v = Vector(n, 0.0);
      const Matrix g0 = obj.grad(w0);
      st.r = row_sum_sq(g0, fp.warm_eps);
      st.s = col_sum_sq(g0, fp.warm_eps);
      break;
    }
  }
  return st;
}

double h_gdm(const Objective& obj, const Matrix& w, const Matrix& m) {
  const double fn = frobenius_norm(m);
  return obj.loss(w) + 0.5 * fn * fn;
}

double h_adafactor(const Objective& obj, const Matrix& w, const Matrix& m, const Vector& r,
                   const Vector& s) {
  require_positive(r, "h_adafactor");
  require_positive(s, "h_adafactor");
  const double root_total = std::sqrt(sum(r));
  double kinetic = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      kinetic += m(i, j) * m(i, j) * root_total / std::sqrt(r[i] * s[j]);
  return obj.loss(w) + 0.5 * kinetic;
}

double h_facfirst(const Objective& obj, const Matrix& w, const Vector& u, const Vector& v,
                  double beta_weight) {
  const double m = static_cast<double>(w.rows());
  const double n = static_cast<double>(w.cols());
  return obj.loss(w) + 0.5 * beta_weight * n * norm_sq(u) + 0.5 * beta_weight * m * norm_sq(v);
}

double h_hfac(const Objective& obj, const Matrix& w, const Vector& u, const Vector& v,
              const Vector& r, const Vector& s) {
  require_positive(r, "h_hfac");
  require_positive(s, "h_hfac");
  const double m = static_cast<double>(w.rows());
  const double n = static_cast<double>(w.cols());
  double row_kin = 0.0, col_kin = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) row_kin += u[i] * u[i] / std::sqrt(r[i]);
  for (std::size_t j = 0; j < v.size(); ++j) col_kin += v[j] * v[j] / std::sqrt(s[j]);
  return obj.loss(w) + 0.25 * n * row_kin + 0.25 * m * col_kin;
}

double flow_hamiltonian(Flow flow, const Objective& obj, const FlowState& st,
                        const FlowParams& fp) {
  switch (flow) {
    case Flow::kGdm: return h_gdm(obj, st.w, st.m);
    case Flow::kAdafactor: return h_adafactor(obj, st.w, st.m, st.r, st.s);
    case Flow::kFacFirst: return h_facfirst(obj, st.w, st.u, st.v, fp.beta_weight);
    case Flow::kHFac: return h_hfac(obj, st.w, st.u, st.v, st.r, st.s);
  }
  throw std::invalid_argument("unknown flow enum value");
}

void euler_step(Flow flow, const Objective& obj, FlowState& st, double h, const FlowParams& fp) {
  if (!(h > 0.0)) throw std::invalid_argument("euler_step: h must be positive");
  const std::size_t m = st.w.rows(), n = st.w.cols();
  const Matrix g = obj.grad(st.w);
  switch (flow) {
    case Flow::kGdm: {
      // dW = M, dM = -gamma M - G (gamma = alpha).
      for (std::size_t k = 0; k < st.w.size(); ++k) {
        const double mk = st.m.data()[k];
        st.w.data()[k] += h * mk;
        st.m.data()[k] += h * (-fp.alpha * mk - g.data()[k]);
      }
      break;
    }
    case Flow::kAdafactor: {
      // dW = -M / sqrt(Vhat), dM = G - alpha M, dr = rss(G) - beta r,
      // ds = css(G) - beta s.
      require_positive(st.r, "adafactor flow");
      require_positive(st.s, "adafactor flow");
      const double total = sum(st.r);
      const Vector rss = row_sum_sq(g, 0.0);
      const Vector css = col_sum_sq(g, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double vhat = st.r[i] * st.s[j] / total;
          st.w(i, j) -= h * st.m(i, j) / std::sqrt(vhat);
        }
      for (std::size_t k = 0; k < st.m.size(); ++k)
        st.m.data()[k] += h * (g.data()[k] - fp.alpha * st.m.data()[k]);
      for (std::size_t i = 0; i < m; ++i) st.r[i] += h * (rss[i] - fp.beta * st.r[i]);
      for (std::size_t j = 0; j < n; ++j) st.s[j] += h * (css[j] - fp.beta * st.s[j]);
      break;
    }
    case Flow::kFacFirst: {
      // dW = -(b uh 1^T + G) - (b 1 vh^T + G) with uh = u - row_mean(G),
      // vh = v - col_mean(G); du = row_mean(G) - alpha u, dv likewise.
      const Vector rm = row_mean(g);
      const Vector cm = col_mean(g);
      const double b = fp.beta_weight;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double row_part = b * (st.u[i] - rm[i]) + g(i, j);
          const double col_part = b * (st.v[j] - cm[j]) + g(i, j);
          st.w(i, j) -= h * (row_part + col_part);
        }
      for (std::size_t i = 0; i < m; ++i) st.u[i] += h * (rm[i] - fp.alpha * st.u[i]);
      for (std::size_t j = 0; j < n; ++j) st.v[j] += h * (cm[j] - fp.alpha * st.v[j]);
      break;
    }
    case Flow::kHFac: {
      // dW = -(phi + psi)/2 - G / sqrt(Vhat) with phi_i = (u_i - rm_i)/sqrt(r_i),
      // psi_j analogous (no /n, /m inside the roots in the continuous system);
      // du = rm - alpha u, dr = rss(G) - beta r, and the column analogues.
      require_positive(st.r, "hfac flow");
      require_positive(st.s, "hfac flow");
      const double total = sum(st.r);
      const Vector rm = row_mean(g);
      const Vector cm = col_mean(g);
      const Vector rss = row_sum_sq(g, 0.0);
      const Vector css = col_sum_sq(g, 0.0);
      Vector phi(m), psi(n);
      for (std::size_t i = 0; i < m; ++i) phi[i] = (st.u[i] - rm[i]) / std::sqrt(st.r[i]);
      for (std::size_t j = 0; j < n; ++j) psi[j] = (st.v[j] - cm[j]) / std::sqrt(st.s[j]);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double vhat = st.r[i] * st.s[j] / total;
          st.w(i, j) -= h * (0.5 * (phi[i] + psi[j]) + g(i, j) / std::sqrt(vhat));
        }
      for (std::size_t i = 0; i < m; ++i) st.u[i] += h * (rm[i] - fp.alpha * st.u[i]);
      for (std::size_t j = 0; j < n; ++j) st.v[j] += h * (cm[j] - fp.alpha * st.v[j]);
      for (std::size_t i = 0; i < m; ++i) st.r[i] += h * (rss[i] - fp.beta * st.r[i]);
      for (std::size_t j = 0; j < n; ++j) st.s[j] += h * (css[j] - fp.beta * st.s[j]);
      break;
    }
  }
  st.time += h;
}

DescentReport check_descent(Flow flow, const Objective& obj, const Matrix& w0, double h,
                            std::size_t n_steps, const FlowParams& fp) {
  if (n_steps == 0) throw std::invalid_argument("check_descent: n_steps must be positive");
  FlowState st = flow_init(flow, obj, w0, fp);
  DescentReport rep;
  rep.flow = flow_name(flow);
  rep.objective = obj.name();
  rep.alpha = fp.alpha;
  rep.beta = fp.beta;
  rep.beta_weight = fp.beta_weight;
  rep.h = h;
  rep.steps = n_steps;
  rep.h0 = flow_hamiltonian(flow, obj, st, fp);
  rep.tol = 10.0 * h * h * std::fabs(rep.h0);
  double prev = rep.h0;
  double max_inc = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= n_steps; ++k) {
    euler_step(flow, obj, st, h, fp);
    const double cur = flow_hamiltonian(flow, obj, st, fp);
    const double inc = cur - prev;
    if (k == 1) rep.first_increase = inc;
    if (inc > max_inc) max_inc = inc;
    if (inc > rep.tol) ++rep.violations;
    prev = cur;
  }
  rep.h_final = prev;
  rep.max_increase = max_inc;
  rep.total_decrease = rep.h0 - rep.h_final;
  rep.final_grad_norm = stationarity_probe(obj, st);
  rep.pass = rep.violations == 0 && rep.total_decrease > 0.0;
  return rep;
}

double stationarity_probe(const Objective& obj, const FlowState& st) {
  return frobenius_norm(obj.grad(st.w));
}

std::string to_json(const DescentReport& rep) {
  nlohmann::json j;
  j["flow"] = rep.flow;
  j["objective"] = rep.objective;
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["beta_weight"] = rep.beta_weight;
  j["h"] = rep.h;
  j["steps"] = rep.steps;
  j["H0"] = rep.h0;
  j["H_final"] = rep.h_final;
  j["tol"] = rep.tol;
  j["max_increase"] = rep.max_increase;
  j["first_increase"] = rep.first_increase;
  j["total_decrease"] = rep.total_decrease;
  j["violations"] = rep.violations;
  j["final_grad_norm"] = rep.final_grad_norm;
  j["pass"] = rep.pass;
  return j.dump();
}

}  // namespace hfac
