// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hfac/matrix.hpp"
#include "hfac/objectives.hpp"

namespace hfac {

// Continuous-time systems whose Hamiltonians certify descent. The discrete
// optimizers are their explicit-Euler discretizations.
enum class Flow { kGdm, kAdafactor, kFacFirst, kHFac };

Flow parse_flow(const std::string& name);
std::string flow_name(Flow flow);

struct FlowParams {
  double alpha = 1.0;        // first-moment decay rate (friction gamma for GDmFlow)
  double beta = 2.0;         // second-moment decay rate where applicable
  double beta_weight = 0.9;  // blend weight inside FacFirstFlow, in (0,1)
  double warm_eps = 1e-8;    // additive floor in the gradient-seeded r, s warm start
};

// Checks the per-flow descent sufficient conditions: beta <= 2 alpha
// (AdafactorFlow), beta <= 4 alpha (HFacFlow), beta_weight in (0,1)
// (FacFirstFlow). flow_init and check_descent enforce only structural
// requirements (positivity), so a violating system can still be integrated
// and reported as failing (negative control).
void validate_flow_params(Flow flow, const FlowParams& fp);

struct FlowState {
  Matrix w;
  Matrix m;    // GDmFlow / AdafactorFlow momentum
  Vector u, v; // FacFirstFlow / HFacFlow factored first moments
  Vector r, s; // AdafactorFlow / HFacFlow factored second moments
  double time = 0.0;
};

// Builds the initial state. For flows dividing by sqrt(r), sqrt(s), the
// accumulators are warm-started from the squared initial gradient,
// r0 = row_sum_sq(G0, warm_eps) and the column analogue, which keeps them
// strictly positive while preserving the row/column sum symmetry the descent
// argument uses.
FlowState flow_init(Flow flow, const Objective& obj, const Matrix& w0, const FlowParams& fp);

double flow_hamiltonian(Flow flow, const Objective& obj, const FlowState& st,
                        const FlowParams& fp);

// Hamiltonian evaluators on raw states.
double h_gdm(const Objective& obj, const Matrix& w, const Matrix& m);
double h_adafactor(const Objective& obj, const Matrix& w, const Matrix& m, const Vector& r,
                   const Vector& s);
double h_facfirst(const Objective& obj, const Matrix& w, const Vector& u, const Vector& v,
                  double beta_weight);
double h_hfac(const Objective& obj, const Matrix& w, const Vector& u, const Vector& v,
              const Vector& r, const Vector& s);

// One explicit Euler step of the flow's vector field; advances time by h.
void euler_step(Flow flow, const Objective& obj, FlowState& st, double h, const FlowParams& fp);

struct DescentReport {
  std::string flow;
  std::string objective;
  double alpha = 0.0;
  double beta = 0.0;
  double beta_weight = 0.0;
  double h = 0.0;
  std::size_t steps = 0;
  double h0 = 0.0;             // initial Hamiltonian
  double h_final = 0.0;
  double tol = 0.0;            // per-step allowance 10 h^2 |H0|
  double max_increase = 0.0;   // largest single-step increase (can be negative)
  double first_increase = 0.0; // H1 - H0
  double total_decrease = 0.0; // H0 - H_final
  std::size_t violations = 0;  // steps with increase > tol
  double final_grad_norm = 0.0;
  bool pass = false;           // violations == 0 and total_decrease > 0
};

std::string to_json(const DescentReport& report);

// Integrates n_steps from w0 and scores every per-step Hamiltonian change
// against tol = 10 h^2 |H0| (absorbs the O(h^2) Euler error).
DescentReport check_descent(Flow flow, const Objective& obj, const Matrix& w0, double h,
                            std::size_t n_steps, const FlowParams& fp);

// LaSalle probe: gradient norm at the end of a trajectory.
double stationarity_probe(const Objective& obj, const FlowState& st);

}  // namespace hfac
