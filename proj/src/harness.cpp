// SPDX-License-Identifier: Apache-2.0
#include "hfac/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hfac {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& scope) {
  for (const auto& item : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end())
      throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " + scope);
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

// ------------------------------------------------------------------ schedules

ScheduleKind parse_schedule(const std::string& name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "cosine") return ScheduleKind::kCosine;
  if (name == "warmup_linear") return ScheduleKind::kWarmupLinear;
  if (name == "warmup_cosine") return ScheduleKind::kWarmupCosine;
  throw std::invalid_argument("unknown schedule: " + name);
}

std::string schedule_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kCosine: return "cosine";
    case ScheduleKind::kWarmupLinear: return "warmup_linear";
    case ScheduleKind::kWarmupCosine: return "warmup_cosine";
  }
  throw std::invalid_argument("unknown schedule enum value");
}

double lr_at(const ScheduleSpec& spec, std::size_t t, std::size_t total_steps) {
  if (t < 1 || t > total_steps)
    throw std::out_of_range("lr_at: step " + std::to_string(t) + " outside [1, " +
                            std::to_string(total_steps) + "]");
  if (!(spec.base_lr > 0.0)) throw std::invalid_argument("lr_at: base_lr must be positive");
  const double t_d = static_cast<double>(t);
  const double total = static_cast<double>(total_steps);
  const double warm = static_cast<double>(spec.warmup_steps);
  switch (spec.kind) {
    case ScheduleKind::kConstant:
      return spec.base_lr;
    case ScheduleKind::kCosine:
      return spec.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t_d / total));
    case ScheduleKind::kWarmupLinear:
      if (spec.warmup_steps >= total_steps)
        throw std::invalid_argument("lr_at: warmup_steps must be < total steps");
      if (t <= spec.warmup_steps) return spec.base_lr * t_d / warm;
      return spec.base_lr * (total - t_d) / (total - warm);
    case ScheduleKind::kWarmupCosine: {
      if (spec.warmup_steps >= total_steps)
        throw std::invalid_argument("lr_at: warmup_steps must be < total steps");
      if (t <= spec.warmup_steps) return spec.base_lr * t_d / warm;
      const double progress = (t_d - warm) / (total - warm);
      const double floor = 0.1 * spec.base_lr;
      return floor + (spec.base_lr - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    }
  }
  throw std::invalid_argument("unknown schedule enum value");
}

// ------------------------------------------------------------- configuration

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  try {
    if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown_keys(root,
                        {"schema", "objective", "optimizer", "schedule", "steps", "seed",
                         "log_every", "output_csv", "output_summary", "monitor_hamiltonian"},
                        "top level");
    if (!root.contains("schema") || !root["schema"].is_number_integer() ||
        root["schema"].get<int>() != 1)
      throw std::invalid_argument("config: requires \"schema\": 1");

    ExperimentConfig cfg;

    const json& obj = root.at("objective");
    reject_unknown_keys(obj, {"kind", "rows", "cols", "seed"}, "objective");
    cfg.objective_kind = obj.at("kind").get<std::string>();
    if (objective_takes_shape(cfg.objective_kind)) {
      cfg.rows = obj.at("rows").get<std::size_t>();
      cfg.cols = obj.at("cols").get<std::size_t>();
    } else if (obj.contains("rows") || obj.contains("cols")) {
      throw std::invalid_argument("config: objective \"" + cfg.objective_kind +
                                  "\" fixes its own shape; rows/cols not accepted");
    }
    cfg.objective_seed = obj.value("seed", std::uint64_t{0});

    const json& opt = root.at("optimizer");
    reject_unknown_keys(opt, {"algo", "hyper", "policy"}, "optimizer");
    cfg.algo = parse_algo(opt.at("algo").get<std::string>());
    cfg.hyper = default_hyper(cfg.algo);
    if (opt.contains("hyper")) {
      const json& hy = opt["hyper"];
      reject_unknown_keys(
          hy, {"beta1", "beta2", "eps", "weight_decay", "clip_threshold", "gamma"}, "hyper");
      cfg.hyper.beta1 = hy.value("beta1", cfg.hyper.beta1);
      cfg.hyper.beta2 = hy.value("beta2", cfg.hyper.beta2);
      cfg.hyper.eps = hy.value("eps", cfg.hyper.eps);
      cfg.hyper.weight_decay = hy.value("weight_decay", cfg.hyper.weight_decay);
      cfg.hyper.clip_threshold = hy.value("clip_threshold", cfg.hyper.clip_threshold);
      cfg.hyper.gamma = hy.value("gamma", cfg.hyper.gamma);
    }
    validate_hyper(cfg.hyper);
    if (opt.contains("policy")) {
      const json& pol = opt["policy"];
      reject_unknown_keys(pol, {"fullhead", "ablation"}, "policy");
      cfg.policy.fullhead = pol.value("fullhead", false);
      cfg.policy.ablation = pol.value("ablation", false);
    }

    const json& sched = root.at("schedule");
    reject_unknown_keys(sched, {"kind", "base_lr", "warmup_steps"}, "schedule");
    cfg.schedule.kind = parse_schedule(sched.at("kind").get<std::string>());
    cfg.schedule.base_lr = sched.at("base_lr").get<double>();
    if (!(cfg.schedule.base_lr > 0.0))
      throw std::invalid_argument("config: base_lr must be positive");
    const bool has_warmup = cfg.schedule.kind == ScheduleKind::kWarmupLinear ||
                            cfg.schedule.kind == ScheduleKind::kWarmupCosine;
    if (has_warmup) {
      cfg.schedule.warmup_steps = sched.at("warmup_steps").get<std::size_t>();
    } else if (sched.contains("warmup_steps")) {
      throw std::invalid_argument("config: warmup_steps only applies to warmup schedules");
    }

    cfg.steps = root.at("steps").get<std::size_t>();
    if (cfg.steps == 0) throw std::invalid_argument("config: steps must be >= 1");
    if (has_warmup && cfg.schedule.warmup_steps >= cfg.steps)
      throw std::invalid_argument("config: warmup_steps must be < steps");
    cfg.seed = root.value("seed", std::uint64_t{0});
    cfg.log_every = root.value("log_every", std::size_t{1});
    if (cfg.log_every == 0) throw std::invalid_argument("config: log_every must be >= 1");
    cfg.output_csv = root.value("output_csv", std::string("trajectory.csv"));
    cfg.output_summary = root.value("output_summary", std::string());
    cfg.monitor_hamiltonian = root.value("monitor_hamiltonian", false);
    return cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("HFAC_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
    return std::filesystem::path(dir) / p;
  return p;
}

// ---------------------------------------------------------------- experiment

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string default_summary_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string() + "_summary.json";
}

// Kinetic part of the matching Hamiltonian, evaluated on a discrete
// optimizer state. Supported: gdm, adafactor_m, signfsgd, hfac.
double monitor_kinetic(const OptimizerState& st, std::size_t m, std::size_t n,
                       const HyperParams& hp) {
  switch (st.algo) {
    case Algo::kGdm: {
      const double fn = frobenius_norm(st.m);
      return 0.5 * fn * fn;
    }
    case Algo::kAdafactorM: {
      double total = sum(st.r);
      if (!(total > 0.0)) throw std::domain_error("hamiltonian monitor: sum(r) not positive");
      double kin = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (!(st.r[i] > 0.0 && st.s[j] > 0.0))
            throw std::domain_error("hamiltonian monitor: r/s entries must be positive");
          kin += st.m(i, j) * st.m(i, j) * std::sqrt(total) / std::sqrt(st.r[i] * st.s[j]);
        }
      return 0.5 * kin;
    }
    case Algo::kSignFsgd:
      return 0.5 * hp.beta1 *
             (static_cast<double>(n) * norm_sq(st.u) + static_cast<double>(m) * norm_sq(st.w));
    case Algo::kHFac: {
      double row_kin = 0.0, col_kin = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(st.r[i] > 0.0)) throw std::domain_error("hamiltonian monitor: r must be positive");
        row_kin += st.u[i] * st.u[i] / std::sqrt(st.r[i]);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!(st.s[j] > 0.0)) throw std::domain_error("hamiltonian monitor: s must be positive");
        col_kin += st.w[j] * st.w[j] / std::sqrt(st.s[j]);
      }
      return 0.25 * (static_cast<double>(n) * row_kin + static_cast<double>(m) * col_kin);
    }
    default:
      throw std::invalid_argument("hamiltonian monitor unsupported for optimizer " +
                                  algo_name(st.algo));
  }
}

bool monitor_supported(Algo algo) {
  return algo == Algo::kGdm || algo == Algo::kAdafactorM || algo == Algo::kSignFsgd ||
         algo == Algo::kHFac;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  validate_hyper(cfg.hyper);
  if (cfg.steps == 0) throw std::invalid_argument("run_experiment: steps must be >= 1");
  if (cfg.log_every == 0) throw std::invalid_argument("run_experiment: log_every must be >= 1");
  if (cfg.monitor_hamiltonian && !monitor_supported(cfg.algo))
    throw std::invalid_argument("run_experiment: no hamiltonian monitor for optimizer " +
                                algo_name(cfg.algo));

  const auto obj = make_objective(cfg.objective_kind, cfg.rows, cfg.cols, cfg.objective_seed);
  Rng rng(cfg.seed);
  std::vector<Matrix> params = obj->initial_params(rng);
  const std::size_t n_params = params.size();

  std::vector<OptimizerState> states;
  states.reserve(n_params);
  for (std::size_t p = 0; p < n_params; ++p) {
    ParamPolicy policy = cfg.policy;
    // fullhead replaces factored momentum on the head (last) parameter only.
    policy.fullhead = cfg.policy.fullhead && p + 1 == n_params;
    states.push_back(init_state(cfg.algo, params[p].rows(), params[p].cols(), cfg.hyper, policy));
  }

  std::string csv;
  csv.reserve(128 * (cfg.steps / cfg.log_every + 2));
  csv += "step,lr,loss,grad_norm,update_rms,hamiltonian,wallclock_ns\n";

  const auto t_start = std::chrono::steady_clock::now();
  const auto span_params = std::span<const Matrix>(params.data(), params.size());

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    const double lr = lr_at(cfg.schedule, t, cfg.steps);
    const double loss = obj->loss(span_params);
    const std::vector<Matrix> grads = obj->grad(span_params);
    double grad_sq = 0.0;
    for (const Matrix& g : grads) {
      const double fn = frobenius_norm(g);
      grad_sq += fn * fn;
    }
    const double grad_norm = std::sqrt(grad_sq);

    double update_rms = 0.0;
    for (std::size_t p = 0; p < n_params; ++p) {
      const Matrix before = params[p];
      step(states[p], params[p], grads[p], lr, cfg.hyper);
      update_rms = std::max(update_rms, rms(params[p] - before));
    }

    double hamiltonian = 0.0;
    if (cfg.monitor_hamiltonian) {
      hamiltonian = obj->loss(span_params);
      for (std::size_t p = 0; p < n_params; ++p)
        hamiltonian += monitor_kinetic(states[p], params[p].rows(), params[p].cols(), cfg.hyper);
    }

    if (!std::isfinite(loss) || !std::isfinite(grad_norm) || !std::isfinite(update_rms) ||
        (cfg.monitor_hamiltonian && !std::isfinite(hamiltonian)))
      throw std::runtime_error("run_experiment: numeric blow-up at step " + std::to_string(t));

    if (t % cfg.log_every == 0 || t == cfg.steps) {
      std::uint64_t wallclock_ns = 0;
      if (cfg.timing)
        wallclock_ns = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                 t_start)
                .count());
      csv += std::to_string(t);
      csv += ',';
      csv += format_double(lr);
      csv += ',';
      csv += format_double(loss);
      csv += ',';
      csv += format_double(grad_norm);
      csv += ',';
      csv += format_double(update_rms);
      csv += ',';
      if (cfg.monitor_hamiltonian) csv += format_double(hamiltonian);
      csv += ',';
      csv += std::to_string(wallclock_ns);
      csv += '\n';
    }
  }

  ExperimentSummary summary;
  summary.final_loss = obj->loss(span_params);
  {
    const std::vector<Matrix> grads = obj->grad(span_params);
    double grad_sq = 0.0;
    for (const Matrix& g : grads) {
      const double fn = frobenius_norm(g);
      grad_sq += fn * fn;
    }
    summary.final_grad_norm = std::sqrt(grad_sq);
  }
  summary.state_elements = 0;
  for (const OptimizerState& st : states) summary.state_elements += state_element_count(st);
  summary.steps = cfg.steps;
  summary.seed = cfg.seed;
  summary.algo = algo_name(cfg.algo);
  summary.csv_path = resolve_output_path(cfg.output_csv);
  summary.summary_path = resolve_output_path(
      cfg.output_summary.empty() ? default_summary_path(cfg.output_csv) : cfg.output_summary);

  write_file_atomic(summary.csv_path, csv);

  json sj;
  sj["final_loss"] = summary.final_loss;
  sj["final_grad_norm"] = summary.final_grad_norm;
  sj["state_elements"] = summary.state_elements;
  sj["steps"] = summary.steps;
  sj["seed"] = summary.seed;
  sj["algo"] = summary.algo;
  write_file_atomic(summary.summary_path, sj.dump(2) + "\n");

  return summary;
}

// ------------------------------------------------------------- memory report

std::vector<MemoryRow> memory_report(const std::vector<Shape>& shapes) {
  if (shapes.empty()) throw std::invalid_argument("memory_report: shape list is empty");
  std::vector<MemoryRow> rows;
  for (const auto& [m, n] : shapes) {
    for (Algo algo : algo_registry()) {
      MemoryRow row;
      row.algo = algo_name(algo);
      row.rows = m;
      row.cols = n;
      row.weights = m * n;
      row.gradient = m * n;
      row.states = state_element_count(algo, m, n);
      row.total = row.weights + row.gradient + row.states;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string render_memory_text(const std::vector<MemoryRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "optimizer" << std::right << std::setw(7) << "rows"
      << std::setw(7) << "cols" << std::setw(12) << "weights" << std::setw(12) << "gradient"
      << std::setw(12) << "states" << std::setw(12) << "total" << '\n';
  for (const MemoryRow& r : rows)
    out << std::left << std::setw(16) << r.algo << std::right << std::setw(7) << r.rows
        << std::setw(7) << r.cols << std::setw(12) << r.weights << std::setw(12) << r.gradient
        << std::setw(12) << r.states << std::setw(12) << r.total << '\n';
  return out.str();
}

std::string render_memory_csv(const std::vector<MemoryRow>& rows) {
  std::string out = "algo,rows,cols,weights,gradient,states,total\n";
  for (const MemoryRow& r : rows) {
    out += r.algo;
    out += ',' + std::to_string(r.rows) + ',' + std::to_string(r.cols) + ',' +
           std::to_string(r.weights) + ',' + std::to_string(r.gradient) + ',' +
           std::to_string(r.states) + ',' + std::to_string(r.total) + '\n';
  }
  return out;
}

// -------------------------------------------------------------- descent suite

namespace {

Matrix rosenbrock_floor_start(Rng& rng, std::size_t m, std::size_t n) {
  // Row-wise points on the valley floor y = x^2, entries in (0, 1).
  Matrix w(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double x = rng.uniform(0.8, 0.95);
    for (std::size_t j = 0; j < n; ++j) {
      w(i, j) = x;
      x = x * x;
    }
  }
  return w;
}

Matrix uniform_start(Rng& rng, std::size_t m, std::size_t n, double lo, double hi) {
  Matrix w(m, n);
  for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(lo, hi);
  return w;
}

constexpr double kSuiteHorizon = 10.0;  // integration horizon in ODE time

}  // namespace

DescentSuiteResult run_descent_suite(const DescentSuiteOptions& options) {
  DescentSuiteResult result;

  const DiagQuadratic quad(8, 6, 42);
  const MatrixRosenbrock rosen(4, 4);
  Rng quad_rng(142);
  const Matrix quad_start = quad.initial_params(quad_rng)[0];

  const FlowParams gdm_params{.alpha = 1.0};
  const FlowParams ada_params{.alpha = 1.0, .beta = 2.0};
  const FlowParams fac_params{.beta_weight = 0.9};
  const FlowParams hfac_params{.alpha = 1.0, .beta = 4.0};

  struct RequiredRow {
    Flow flow;
    const Objective* obj;
    Matrix start;
    double h;
    std::size_t steps;
    FlowParams params;
  };

  // Starts chosen so every row clears its tolerance with a wide margin; the
  // quadratic rows share one draw, the valley rows each take a fresh one.
  auto fresh = [](std::uint64_t seed) { return Rng(seed); };
  Rng floor_rng = fresh(7), mid_rng = fresh(7), far_rng = fresh(7);
  std::vector<RequiredRow> required_rows;
  required_rows.push_back({Flow::kGdm, &quad, quad_start, 1e-3, 10000, gdm_params});
  required_rows.push_back(
      {Flow::kGdm, &rosen, rosenbrock_floor_start(floor_rng, 4, 4), 1e-4, 100000, gdm_params});
  required_rows.push_back({Flow::kAdafactor, &quad, quad_start, 1e-3, 10000, ada_params});
  required_rows.push_back(
      {Flow::kAdafactor, &rosen, uniform_start(mid_rng, 4, 4, -0.5, 1.5), 1e-3, 10000, ada_params});
  required_rows.push_back({Flow::kFacFirst, &quad, quad_start, 1e-3, 10000, fac_params});
  {
    Rng mid2 = fresh(7);
    required_rows.push_back({Flow::kFacFirst, &rosen, uniform_start(mid2, 4, 4, -0.5, 1.5), 1e-4,
                             100000, fac_params});
  }
  required_rows.push_back({Flow::kHFac, &quad, quad_start, 1e-4, 100000, hfac_params});
  required_rows.push_back(
      {Flow::kHFac, &rosen, uniform_start(far_rng, 4, 4, -2.0, 2.0), 1e-4, 100000, hfac_params});

  bool all_pass = true;
  for (const RequiredRow& row : required_rows) {
    validate_flow_params(row.flow, row.params);
    DescentReport rep = check_descent(row.flow, *row.obj, row.start, row.h, row.steps, row.params);
    all_pass = all_pass && rep.pass;
    result.required.push_back(std::move(rep));
  }

  // Tolerance-scaling grid on the quadratic with a fixed integration horizon.
  std::vector<double> grid = options.grid_h;
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  if (grid.empty()) throw std::invalid_argument("descent suite: empty step-size grid");
  const std::vector<std::pair<Flow, FlowParams>> flows = {
      {Flow::kGdm, gdm_params},
      {Flow::kAdafactor, ada_params},
      {Flow::kFacFirst, fac_params},
      {Flow::kHFac, hfac_params},
  };
  for (const auto& [flow, params] : flows) {
    double coarse_inc = 0.0, fine_inc = 0.0;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const double h = grid[gi];
      const auto steps = static_cast<std::size_t>(std::llround(kSuiteHorizon / h));
      DescentReport rep = check_descent(flow, quad, quad_start, h, steps, params);
      if (gi == 0) coarse_inc = rep.max_increase;
      if (gi + 1 == grid.size()) fine_inc = rep.max_increase;
      result.grid.push_back(std::move(rep));
    }
    ScalingCheck check;
    check.flow = flow_name(flow);
    check.coarse_h = grid.front();
    check.fine_h = grid.back();
    check.coarse_increase = coarse_inc;
    check.fine_increase = fine_inc;
    // Max positive per-step increase must shrink by >= 10x across the grid;
    // a flow that never increases passes outright.
    check.pass = coarse_inc <= 0.0 || (grid.size() < 2) || fine_inc <= 0.1 * coarse_inc;
    all_pass = all_pass && check.pass;
    result.scaling.push_back(check);
  }

  if (options.negative_control) {
    // beta = 10 alpha sails past the sufficient condition; on a badly
    // conditioned quadratic the checker is expected to report violations.
    const DiagQuadratic adversarial(6, 5, 7, 0.01, 1000.0);
    Rng adv_rng(142);
    const Matrix adv_start = adversarial.initial_params(adv_rng)[0];
    const FlowParams bad{.alpha = 1.0, .beta = 10.0};
    result.negative_control =
        check_descent(Flow::kAdafactor, adversarial, adv_start, 1e-3, 10000, bad);
    result.has_negative_control = true;
  }

  result.pass = all_pass;
  return result;
}

// ------------------------------------------------------------- gradient check

GradCheckResult gradient_check(const Objective& obj, std::size_t points, std::uint64_t seed,
                               double fd_h, double tol) {
  if (points == 0) throw std::invalid_argument("gradient_check: points must be >= 1");
  Rng rng(seed);
  GradCheckResult result;
  result.points = points;
  for (std::size_t k = 0; k < points; ++k) {
    const std::vector<Matrix> params = obj.initial_params(rng);
    const auto span = std::span<const Matrix>(params.data(), params.size());
    const std::vector<Matrix> analytic = obj.grad(span);
    const std::vector<Matrix> numeric = finite_diff_grad(obj, span, fd_h);
    for (std::size_t p = 0; p < params.size(); ++p)
      for (std::size_t e = 0; e < analytic[p].size(); ++e) {
        const double a = analytic[p].data()[e];
        const double b = numeric[p].data()[e];
        const double rel =
            std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
        result.max_rel_err = std::max(result.max_rel_err, rel);
      }
  }
  result.pass = result.max_rel_err <= tol;
  return result;
}

double default_gradcheck_tol(const std::string& objective_kind) {
  return objective_kind == "two_layer_mlp" ? 1e-3 : 1e-4;
}

}  // namespace hfac
