// drslip: analytic DRS-LIP solutions, stability maps, gait planning, timing.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "drslip/commands.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<int> terms;
  std::optional<double> horizon;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "random seed for generated initial conditions");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--trials", o.trials, "random trials (solve) or timing repetitions (bench)");
  cmd->add_option("--terms", o.terms, "series truncation order N");
  cmd->add_option("--horizon", o.horizon, "comparison horizon in seconds");
}

drslip::RunConfig resolve(const Overrides& o, const std::string& command) {
  using namespace drslip;
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.terms) {
    if (*o.terms < 0) fail(ErrorKind::validation, "--terms must be >= 0");
    c.solver.terms = *o.terms;
    c.plan.options.order_N = *o.terms;
  }
  if (o.horizon) {
    if (!(*o.horizon >= 0.0)) fail(ErrorKind::validation, "--horizon must be >= 0");
    c.solve.horizon_s = *o.horizon;
  }
  if (o.trials) {
    if (*o.trials < 1) fail(ErrorKind::validation, "--trials must be >= 1");
    if (command == "bench") c.bench_trials = *o.trials;
    else c.solve.random_trials = *o.trials;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DRS-LIP analytic solver and quadruped gait planner"};
  app.require_subcommand(1);
  Overrides o;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "compare analytic and integrated trajectories"},
      {"stability-map", "Floquet boundedness over a parameter grid"},
      {"plan", "plan a CoM and full-body walking cycle"},
      {"bench", "time analytic vs integrated evaluation and planning"}};
  for (const auto& [name, desc] : commands) add_common(app.add_subcommand(name, desc), o);
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const drslip::RunConfig c = resolve(o, command);
    if (command == "solve") {
      drslip::cmd_solve(c);
    } else if (command == "stability-map") {
      drslip::cmd_stability_map(c);
    } else if (command == "plan") {
      const auto r = drslip::cmd_plan(c);
      if (!r.com.report.feasible) return drslip::exit_code(drslip::ErrorKind::infeasible);
    } else {
      drslip::cmd_bench(c);
    }
  } catch (const drslip::Error& e) {
    std::cerr << "error (" << drslip::to_string(e.kind()) << "): " << e.what() << '\n';
    return drslip::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
