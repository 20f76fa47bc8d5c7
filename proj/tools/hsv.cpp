// Command-line driver: verify, vcs, simulate, falsify.

#include <hsv/driver.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace hsv;

int run_verify(const std::string& file, const std::optional<std::string>& goal, const std::string& json_path,
               const VerifyOptions& opts) {
  ModelFile m = load_model(file);
  Report r = verify(m, opts, goal);
  if (json_path != "-") std::cout << report_text(r);
  if (!json_path.empty()) {
    std::string text = report_json(m, r, opts).dump(2) + "\n";
    if (json_path == "-") {
      std::cout << text;
    } else {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + json_path);
      out << text;
    }
  }
  return r.exit_code();
}

const GoalDef& need_goal(const ModelFile& m, const std::string& name) {
  const GoalDef* g = m.goal(name);
  if (!g) fail(ErrorCode::UnknownName, "no goal named '" + name + "'");
  return *g;
}

int run_vcs(const std::string& file, const std::string& goal, std::uint64_t seed) {
  ModelFile m = load_model(file);
  VerifyOptions opts;
  opts.seed = seed;
  Verifier v(m, opts);
  for (const auto& vc : v.generate(need_goal(m, goal)))
    std::cout << vc.id << " [" << vc.origin << "] " << to_string(vc.formula) << "\n";
  return 0;
}

int run_falsify(const std::string& file, const std::string& goal, std::size_t trials, std::uint64_t seed) {
  ModelFile m = load_model(file);
  VerifyOptions opts;
  opts.seed = seed;
  Verifier v(m, opts);
  auto vcs = v.generate(need_goal(m, goal));
  for (const auto& vc : vcs) {
    Verdict r = falsify(vc, v.ctx(), trials, seed);
    if (!r.is_invalid()) continue;
    std::cout << "counterexample to " << vc.id << " [" << vc.origin << "] " << to_string(vc.formula) << "\n"
              << "  state " << r.witness->str() << "\n";
    for (const auto& [k, val] : r.env) std::cout << "  " << k << " = " << val.str() << "\n";
    return 2;
  }
  std::cout << "no counterexample in " << trials << " trials over " << vcs.size() << " VCs\n";
  return 0;
}

int run_simulate(const std::string& file, const std::string& program, const std::string& init, double step,
                 double horizon, const std::string& trace_path, std::uint64_t seed) {
  ModelFile m = load_model(file);
  const ProgramDef* p = m.program(program);
  if (!p) fail(ErrorCode::UnknownName, "no program named '" + program + "'");
  SimConfig cfg;
  cfg.step = step;
  cfg.horizon = horizon;
  cfg.rng_seed = seed;
  auto pts = simulate_trace(p->body, parse_init(init, m.ds), cfg);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
    out << format_trace(pts);
  }
  std::cout << "final " << format_trace({pts.back()});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid system verifier"};
  app.require_subcommand(1);

  std::string file, goal, json_path, smt_dir, program, init, trace_path;
  hsv::VerifyOptions opts;
  bool strict = false;
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  double step = 0.01, horizon = 10;

  auto* verify = app.add_subcommand("verify", "prove the goals of a model file");
  verify->add_option("file", file, "model file")->required();
  verify->add_option("--goal", goal, "only this goal");
  verify->add_option("--json", json_path, "write the JSON report here ('-' for stdout)");
  verify->add_option("--emit-smt", smt_dir, "write SMT-LIB scripts for undecided VCs here");
  verify->add_option("--jobs", opts.jobs, "goals verified in parallel")->check(CLI::PositiveNumber);
  verify->add_option("--seed", opts.seed, "seed for sampling");
  verify->add_flag("--strict", strict, "exit 3 when a goal is Unknown (always the case)");
  verify->add_flag("--timing", opts.timing, "record per-goal time in the report");

  auto* vcs = app.add_subcommand("vcs", "print the verification conditions of a goal");
  vcs->add_option("file", file, "model file")->required();
  vcs->add_option("--goal", goal, "goal name")->required();
  vcs->add_option("--seed", seed, "seed for sampling");

  auto* sim = app.add_subcommand("simulate", "run a program numerically");
  sim->add_option("file", file, "model file")->required();
  sim->add_option("--program", program, "program name")->required();
  sim->add_option("--init", init, "initial values, NAME=VALUE,...");
  sim->add_option("--step", step, "integration step")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "time horizon")->check(CLI::NonNegativeNumber);
  sim->add_option("--trace", trace_path, "write the trace (TSV) here");
  sim->add_option("--seed", seed, "seed for nondeterministic choices");

  auto* fal = app.add_subcommand("falsify", "search for counterexamples to a goal's VCs");
  fal->add_option("file", file, "model file")->required();
  fal->add_option("--goal", goal, "goal name")->required();
  fal->add_option("--trials", trials, "samples per VC");
  fal->add_option("--seed", seed, "seed for sampling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*verify) {
      if (!smt_dir.empty()) opts.smt_dir = smt_dir;
      return run_verify(file, goal.empty() ? std::nullopt : std::optional<std::string>(goal), json_path, opts);
    }
    if (*vcs) return run_vcs(file, goal, seed);
    if (*sim) return run_simulate(file, program, init, step, horizon, trace_path, seed);
    if (*fal) return run_falsify(file, goal, trials, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
