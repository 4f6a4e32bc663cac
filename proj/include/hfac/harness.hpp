// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hfac/hamiltonian.hpp"
#include "hfac/objectives.hpp"
#include "hfac/optimizers.hpp"

namespace hfac {

// ------------------------------------------------------------------ schedules

enum class ScheduleKind { kConstant, kCosine, kWarmupLinear, kWarmupCosine };

ScheduleKind parse_schedule(const std::string& name);
std::string schedule_name(ScheduleKind kind);

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::kConstant;
  double base_lr = 1e-3;
  std::size_t warmup_steps = 0;  // used by the warmup_* kinds only
};

// Learning rate at step t in [1, total]:
//   constant       base_lr
//   cosine         base_lr * (1 + cos(pi t / total)) / 2
//   warmup_linear  ramp 0 -> base_lr over warmup, then linear decay to 0
//   warmup_cosine  same ramp, then cosine annealing down to 0.1 * base_lr
// Throws out_of_range when t is outside [1, total].
double lr_at(const ScheduleSpec& spec, std::size_t t, std::size_t total_steps);

// ------------------------------------------------------------- configuration

struct ExperimentConfig {
  std::string objective_kind;
  std::size_t rows = 0, cols = 0;   // only for shaped objectives
  std::uint64_t objective_seed = 0;

  Algo algo = Algo::kAdam;
  HyperParams hyper;
  ParamPolicy policy;  // fullhead applies to the last parameter matrix

  ScheduleSpec schedule;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::size_t log_every = 1;

  std::string output_csv = "trajectory.csv";
  std::string output_summary;  // default: output_csv stem + "_summary.json"
  bool monitor_hamiltonian = false;
  bool timing = false;  // real wallclock_ns (opt-in; default 0 keeps bytes reproducible)
};

// Strict parser for the versioned JSON config (schema 1). Unknown keys at any
// level are a hard error. Throws invalid_argument with the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Joins a relative path under $HFAC_OUTPUT_DIR when the variable is set;
// absolute paths and unset environments pass through unchanged.
std::filesystem::path resolve_output_path(const std::string& path);

// ---------------------------------------------------------------- experiment

struct ExperimentSummary {
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  std::size_t state_elements = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::string algo;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

// Runs the configured optimizer on the configured objective, streaming
// TrajectoryRecord rows to CSV (header:
// step,lr,loss,grad_norm,update_rms,hamiltonian,wallclock_ns) and writing the
// summary JSON. Both files are written atomically (temp + rename). The CSV is
// byte-identical across repeat runs of the same config+seed. Throws
// runtime_error on IO failure or numeric blow-up (with the step index).
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Shortest round-trip decimal rendering used for every CSV float field.
std::string format_double(double value);

// ------------------------------------------------------------- memory report

struct MemoryRow {
  std::string algo;
  std::size_t rows = 0, cols = 0;
  std::size_t weights = 0;   // m n
  std::size_t gradient = 0;  // m n
  std::size_t states = 0;    // optimizer accumulators
  std::size_t total = 0;
};

std::vector<MemoryRow> memory_report(const std::vector<Shape>& shapes);
std::string render_memory_text(const std::vector<MemoryRow>& rows);
std::string render_memory_csv(const std::vector<MemoryRow>& rows);

// -------------------------------------------------------------- descent suite

struct DescentSuiteOptions {
  // Step sizes for the tolerance-scaling grid, coarsest first.
  std::vector<double> grid_h = {1e-2, 1e-3, 1e-4};
  bool negative_control = true;
};

struct ScalingCheck {
  std::string flow;
  double coarse_h = 0.0, fine_h = 0.0;
  double coarse_increase = 0.0, fine_increase = 0.0;
  bool pass = false;  // max positive increase shrinks >= 10x (or never positive)
};

struct DescentSuiteResult {
  std::vector<DescentReport> required;  // descent asserted per row
  std::vector<DescentReport> grid;      // informational h-grid rows
  std::vector<ScalingCheck> scaling;    // asserted per flow
  bool has_negative_control = false;
  DescentReport negative_control;       // reported, never asserted
  bool pass = false;                    // all required rows and scaling checks
};

// Runs the four flows over the standard problem set: a pinned
// DiagQuadratic(8x6) and MatrixRosenbrock(4x4) pair per flow (descent
// asserted at a per-row step size), a step-size grid on the quadratic for the
// tolerance-scaling property, and an intentionally out-of-condition
// Adafactor system as a soft negative control.
DescentSuiteResult run_descent_suite(const DescentSuiteOptions& options = {});

// ------------------------------------------------------------- gradient check

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t points = 0;
  bool pass = false;
};

// Compares analytic gradients against central finite differences (step fd_h)
// at `points` seeded random parameter draws. Relative error uses
// |g - fd| / max(|g|, |fd|, 1e-6) per entry.
GradCheckResult gradient_check(const Objective& obj, std::size_t points, std::uint64_t seed,
                               double fd_h, double tol);
// Default tolerance: 1e-3 for two_layer_mlp (tanh curvature), 1e-4 otherwise.
double default_gradcheck_tol(const std::string& objective_kind);

}  // namespace hfac
