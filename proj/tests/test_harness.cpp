// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfac/harness.hpp"

using namespace hfac;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

fs::path case_dir(const std::string& name) {
  const fs::path dir = fs::path("harness_test_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string base_config(const std::string& algo, const std::string& csv, std::size_t steps,
                        double lr) {
  nlohmann::json j;
  j["schema"] = 1;
  j["objective"] = {{"kind", "diag_quadratic"}, {"rows", 8}, {"cols", 6}, {"seed", 3}};
  j["optimizer"] = {{"algo", algo}};
  j["schedule"] = {{"kind", "constant"}, {"base_lr", lr}};
  j["steps"] = steps;
  j["seed"] = 9;
  j["output_csv"] = csv;
  return j.dump();
}

}  // namespace

TEST_CASE("learning rate schedules") {
  ScheduleSpec spec;
  spec.base_lr = 0.4;

  SUBCASE("constant") {
    for (std::size_t t : {std::size_t{1}, std::size_t{50}, std::size_t{100}})
      CHECK(lr_at(spec, t, 100) == 0.4);
  }
  SUBCASE("cosine anneals to zero") {
    spec.kind = ScheduleKind::kCosine;
    CHECK(lr_at(spec, 100, 100) < 1e-12);
    CHECK(lr_at(spec, 50, 100) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(lr_at(spec, 1, 100) > 0.39);
    // Monotone decreasing.
    double prev = lr_at(spec, 1, 100);
    for (std::size_t t = 2; t <= 100; ++t) {
      const double cur = lr_at(spec, t, 100);
      CHECK(cur <= prev);
      prev = cur;
    }
  }
  SUBCASE("warmup linear ramps and decays") {
    spec.kind = ScheduleKind::kWarmupLinear;
    spec.warmup_steps = 10;
    CHECK(lr_at(spec, 1, 100) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(lr_at(spec, 10, 100) == 0.4);  // peak hit exactly at the warmup end
    CHECK(lr_at(spec, 55, 100) == doctest::Approx(0.4 * 45.0 / 90.0).epsilon(1e-14));
    CHECK(lr_at(spec, 100, 100) == 0.0);
  }
  SUBCASE("warmup cosine floors at a tenth of the base rate") {
    spec.kind = ScheduleKind::kWarmupCosine;
    spec.warmup_steps = 10;
    CHECK(lr_at(spec, 10, 100) == 0.4);
    CHECK(lr_at(spec, 100, 100) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(lr_at(spec, 55, 100) == doctest::Approx(0.04 + 0.36 * 0.5).epsilon(1e-12));
    for (std::size_t t = 11; t <= 100; ++t) CHECK(lr_at(spec, t, 100) >= 0.04 - 1e-15);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(lr_at(spec, 0, 100), std::out_of_range);
    CHECK_THROWS_AS(lr_at(spec, 101, 100), std::out_of_range);
    spec.kind = ScheduleKind::kWarmupLinear;
    spec.warmup_steps = 100;
    CHECK_THROWS_AS(lr_at(spec, 5, 100), std::invalid_argument);
    spec.warmup_steps = 0;
    spec.kind = ScheduleKind::kConstant;
    spec.base_lr = 0.0;
    CHECK_THROWS_AS(lr_at(spec, 1, 100), std::invalid_argument);
  }
  SUBCASE("names round trip") {
    for (ScheduleKind k : {ScheduleKind::kConstant, ScheduleKind::kCosine,
                           ScheduleKind::kWarmupLinear, ScheduleKind::kWarmupCosine})
      CHECK(parse_schedule(schedule_name(k)) == k);
    CHECK_THROWS_AS(parse_schedule("step"), std::invalid_argument);
  }
}

TEST_CASE("config parsing accepts the full schema") {
  const std::string text = R"({
    "schema": 1,
    "objective": {"kind": "diag_quadratic", "rows": 4, "cols": 3, "seed": 11},
    "optimizer": {
      "algo": "hfac",
      "hyper": {"beta1": 0.95, "beta2": 0.998, "eps": 1e-20, "weight_decay": 0.01,
                "clip_threshold": 0.5},
      "policy": {"fullhead": true, "ablation": false}
    },
    "schedule": {"kind": "warmup_cosine", "base_lr": 0.02, "warmup_steps": 10},
    "steps": 200,
    "seed": 7,
    "log_every": 5,
    "output_csv": "out/run.csv",
    "output_summary": "out/run_sum.json",
    "monitor_hamiltonian": true
  })";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.objective_kind == "diag_quadratic");
  CHECK(cfg.rows == 4);
  CHECK(cfg.cols == 3);
  CHECK(cfg.objective_seed == 11);
  CHECK(cfg.algo == Algo::kHFac);
  CHECK(cfg.hyper.beta1 == 0.95);
  CHECK(cfg.hyper.beta2 == 0.998);
  CHECK(cfg.hyper.eps == 1e-20);
  CHECK(cfg.hyper.weight_decay == 0.01);
  CHECK(cfg.hyper.clip_threshold == 0.5);
  CHECK(cfg.policy.fullhead);
  CHECK_FALSE(cfg.policy.ablation);
  CHECK(cfg.schedule.kind == ScheduleKind::kWarmupCosine);
  CHECK(cfg.schedule.base_lr == 0.02);
  CHECK(cfg.schedule.warmup_steps == 10);
  CHECK(cfg.steps == 200);
  CHECK(cfg.seed == 7);
  CHECK(cfg.log_every == 5);
  CHECK(cfg.output_csv == "out/run.csv");
  CHECK(cfg.output_summary == "out/run_sum.json");
  CHECK(cfg.monitor_hamiltonian);
}

TEST_CASE("config parsing applies family defaults") {
  const ExperimentConfig adam = parse_config(base_config("adam", "a.csv", 10, 0.1));
  CHECK(adam.hyper.eps == 1e-8);
  CHECK(adam.hyper.beta2 == 0.999);
  CHECK(adam.log_every == 1);
  CHECK_FALSE(adam.monitor_hamiltonian);
  CHECK(adam.output_summary.empty());

  const ExperimentConfig lion = parse_config(base_config("lion", "b.csv", 10, 0.1));
  CHECK(lion.hyper.beta2 == 0.99);
  const ExperimentConfig fac = parse_config(base_config("adafactor_m", "c.csv", 10, 0.1));
  CHECK(fac.hyper.eps == 1e-30);
}

TEST_CASE("config parsing rejects malformed input") {
  auto mutate = [&](auto&& f) {
    nlohmann::json j = nlohmann::json::parse(base_config("adam", "x.csv", 10, 0.1));
    f(j);
    return j.dump();
  };

  // Unknown keys anywhere are hard errors.
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["extra"] = 1; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["objective"]["shape"] = 4; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["optimizer"]["lr"] = 0.1; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["optimizer"]["hyper"] = {{"momentum", 0.9}}; })),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["optimizer"]["policy"] = {{"frozen", true}}; })),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["schedule"]["gamma"] = 0.5; })),
                  std::invalid_argument);

  // Schema pinning.
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j.erase("schema"); })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["schema"] = 2; })), std::invalid_argument);

  // Objective shape rules.
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) {
                    j["objective"] = {{"kind", "logistic_regression"}, {"rows", 6}};
                  })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["objective"].erase("rows"); })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["objective"]["kind"] = "mystery"; })),
                  std::invalid_argument);

  // Optimizer and schedule validation.
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["optimizer"]["algo"] = "sgd"; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["optimizer"]["hyper"] = {{"beta1", 1.0}}; })),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["schedule"]["base_lr"] = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["schedule"]["warmup_steps"] = 5; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) {
                    j["schedule"] = {{"kind", "warmup_linear"}, {"base_lr", 0.1},
                                     {"warmup_steps", 10}};
                  })),
                  std::invalid_argument);  // warmup >= steps
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["steps"] = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["log_every"] = 0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
}

TEST_CASE("experiment runs are byte reproducible") {
  const fs::path dir = case_dir("repro");
  ExperimentConfig cfg = parse_config(base_config("adam", (dir / "one.csv").string(), 120, 0.05));
  cfg.log_every = 10;
  const ExperimentSummary s1 = run_experiment(cfg);
  cfg.output_csv = (dir / "two.csv").string();
  const ExperimentSummary s2 = run_experiment(cfg);

  const std::string c1 = read_file(s1.csv_path);
  const std::string c2 = read_file(s2.csv_path);
  CHECK(c1 == c2);
  CHECK(c1.starts_with("step,lr,loss,grad_norm,update_rms,hamiltonian,wallclock_ns\n"));

  // Without a monitor the hamiltonian field stays empty and wallclock is 0.
  const auto lines = split(c1, '\n');
  REQUIRE(lines.size() >= 3);
  const auto fields = split(lines[1], ',');
  REQUIRE(fields.size() == 7);
  CHECK(fields[0] == "10");
  CHECK(fields[5].empty());
  CHECK(fields[6] == "0");
}

TEST_CASE("adam drives the quadratic to the floor") {
  const fs::path dir = case_dir("adam_quad");
  ExperimentConfig cfg = parse_config(base_config("adam", (dir / "run.csv").string(), 500, 0.1));
  cfg.log_every = 100;
  const ExperimentSummary summary = run_experiment(cfg);
  CHECK(summary.final_loss < 1e-6);
  CHECK(summary.final_grad_norm < 1e-2);
  CHECK(summary.state_elements == 2 * 48);
  CHECK(summary.steps == 500);
  CHECK(summary.seed == 9);
  CHECK(summary.algo == "adam");

  // Summary JSON carries exactly the six contract keys.
  const nlohmann::json j = nlohmann::json::parse(read_file(summary.summary_path));
  CHECK(j.size() == 6);
  for (const char* key :
       {"final_loss", "final_grad_norm", "state_elements", "steps", "seed", "algo"})
    CHECK(j.contains(key));
  CHECK(j["final_loss"].get<double>() == doctest::Approx(summary.final_loss).epsilon(1e-12));
  CHECK(j["algo"].get<std::string>() == "adam");
  CHECK(summary.summary_path.string().ends_with("run_summary.json"));
}

TEST_CASE("hamiltonian monitor column") {
  const fs::path dir = case_dir("monitor");
  ExperimentConfig cfg = parse_config(base_config("gdm", (dir / "mon.csv").string(), 300, 1e-3));
  cfg.monitor_hamiltonian = true;
  cfg.log_every = 10;
  const ExperimentSummary summary = run_experiment(cfg);

  const auto lines = split(read_file(summary.csv_path), '\n');
  REQUIRE(lines.size() > 3);
  const auto first = split(lines[1], ',');
  const auto last = split(lines[lines.size() - 2], ',');
  REQUIRE(first.size() == 7);
  CHECK_FALSE(first[5].empty());
  const double h_first = std::stod(first[5]);
  const double h_last = std::stod(last[5]);
  CHECK(h_last < h_first);

  // Monitors exist only for the optimizers with a matching Hamiltonian.
  ExperimentConfig bad = parse_config(base_config("lion", (dir / "bad.csv").string(), 10, 1e-3));
  bad.monitor_hamiltonian = true;
  CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
}

TEST_CASE("numeric blow-up raises with the step index") {
  const fs::path dir = case_dir("blowup");
  ExperimentConfig cfg = parse_config(base_config("gdm", (dir / "b.csv").string(), 2000, 1e6));
  CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("blow-up at step"),
                       std::runtime_error);
}

TEST_CASE("log_every thins the csv but keeps the last step") {
  const fs::path dir = case_dir("logevery");
  ExperimentConfig cfg = parse_config(base_config("adam", (dir / "t.csv").string(), 10, 0.01));
  cfg.log_every = 3;
  const ExperimentSummary summary = run_experiment(cfg);
  const auto lines = split(read_file(summary.csv_path), '\n');
  // header + steps 3, 6, 9, 10 + trailing empty line after final newline
  REQUIRE(lines.size() == 6);
  CHECK(split(lines[1], ',')[0] == "3");
  CHECK(split(lines[4], ',')[0] == "10");
  CHECK(lines[5].empty());
}

TEST_CASE("output directory override") {
  const fs::path dir = fs::absolute(case_dir("envdir"));
  REQUIRE(setenv("HFAC_OUTPUT_DIR", dir.c_str(), 1) == 0);
  ExperimentConfig cfg = parse_config(base_config("adam", "nested/run.csv", 5, 0.01));
  const ExperimentSummary summary = run_experiment(cfg);
  unsetenv("HFAC_OUTPUT_DIR");

  CHECK(summary.csv_path == dir / "nested/run.csv");
  CHECK(fs::exists(dir / "nested/run.csv"));
  CHECK(fs::exists(dir / "nested/run_summary.json"));

  // Absolute outputs ignore the override.
  REQUIRE(setenv("HFAC_OUTPUT_DIR", "/nonexistent_root_xyz", 1) == 0);
  const fs::path abs_csv = dir / "abs.csv";
  CHECK(resolve_output_path(abs_csv.string()) == abs_csv);
  unsetenv("HFAC_OUTPUT_DIR");
  CHECK(resolve_output_path("plain.csv") == fs::path("plain.csv"));
}

TEST_CASE("fullhead policy counts state for the head parameter only") {
  const fs::path dir = case_dir("fullhead");
  nlohmann::json j;
  j["schema"] = 1;
  j["objective"] = {{"kind", "two_layer_mlp"}, {"seed", 1}};
  j["optimizer"] = {{"algo", "signfsgd"}, {"policy", {{"fullhead", true}}}};
  j["schedule"] = {{"kind", "constant"}, {"base_lr", 1e-3}};
  j["steps"] = 1;
  j["output_csv"] = (dir / "fh.csv").string();
  const ExperimentSummary summary = run_experiment(parse_config(j.dump()));
  // W1 (4x8) keeps the factored pair (12); the head W2 (8x3) gets full
  // momentum (24).
  CHECK(summary.state_elements == 12 + 24);

  j["optimizer"] = {{"algo", "signfsgd"}};
  j["output_csv"] = (dir / "fh2.csv").string();
  const ExperimentSummary plain = run_experiment(parse_config(j.dump()));
  CHECK(plain.state_elements == 12 + 11);
}

TEST_CASE("memory report") {
  const auto rows = memory_report({{4, 3}, {1024, 1024}});
  REQUIRE(rows.size() == 20);

  auto find = [&](const std::string& algo, std::size_t m) -> const MemoryRow& {
    for (const auto& r : rows)
      if (r.algo == algo && r.rows == m) return r;
    FAIL("row not found");
    return rows.front();
  };

  CHECK(find("adam", 4).states == 24);
  CHECK(find("adam", 4).total == 12 + 12 + 24);
  CHECK(find("hfac", 4).states == 14);
  CHECK(find("adafactor_m", 4).states == 19);
  CHECK(find("adam", 1024).states == 2097152);
  CHECK(find("hfac", 1024).states == 4096);
  CHECK(find("signfsgd", 1024).states == 2048);

  const std::string csv = render_memory_csv(rows);
  CHECK(csv.starts_with("algo,rows,cols,weights,gradient,states,total\n"));
  CHECK(split(csv, '\n').size() == 22);  // header + 20 rows + trailing empty
  const std::string text = render_memory_text(rows);
  CHECK(text.find("optimizer") == 0);
  CHECK(text.find("hfac") != std::string::npos);

  CHECK_THROWS_AS(memory_report({}), std::invalid_argument);
}

TEST_CASE("gradient check harness") {
  DiagQuadratic quad(5, 4, 19);
  const GradCheckResult res = gradient_check(quad, 5, 99, 1e-5, 1e-4);
  CHECK(res.pass);
  CHECK(res.points == 5);
  CHECK(res.max_rel_err < 1e-4);

  CHECK(default_gradcheck_tol("two_layer_mlp") == 1e-3);
  CHECK(default_gradcheck_tol("diag_quadratic") == 1e-4);
  CHECK_THROWS_AS(gradient_check(quad, 0, 1, 1e-5, 1e-4), std::invalid_argument);
}

TEST_CASE("format_double round trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  for (double x : {3.141592653589793, 1e-30, -7.25, 123456789.123}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("descent suite structure") {
  // Two coarse grid points keep this affordable as a unit test; the full
  // grid runs in the acceptance binary and the CLI.
  DescentSuiteOptions opts;
  opts.grid_h = {1e-2, 1e-3};
  opts.negative_control = false;
  const DescentSuiteResult res = run_descent_suite(opts);
  REQUIRE(res.required.size() == 8);
  REQUIRE(res.scaling.size() == 4);
  CHECK(res.grid.size() == 8);
  CHECK_FALSE(res.has_negative_control);
  for (const auto& rep : res.required) {
    INFO(rep.flow << " on " << rep.objective);
    CHECK(rep.pass);
  }
  for (const auto& sc : res.scaling) {
    INFO(sc.flow);
    CHECK(sc.pass);
  }
  CHECK(res.pass);
}
