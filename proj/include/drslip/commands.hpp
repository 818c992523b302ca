#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "bench.hpp"
#include "body_planner.hpp"
#include "com_planner.hpp"
#include "config.hpp"
#include "floquet.hpp"
#include "mathieu.hpp"
#include "ode.hpp"

namespace drslip {

// 17 significant digits: doubles survive a text roundtrip
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) fail(ErrorKind::io, "cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    if (!out_) fail(ErrorKind::io, "write failed");
  }

 private:
  std::ofstream out_;
};

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + dir);
  return dir;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct ErrorSummary {
  double mean_pct = 0.0;
  double max_pct = 0.0;
  double sd_pct = 0.0;
  std::size_t samples = 0;
};

inline ErrorSummary summarize(const std::vector<double>& e) {
  ErrorSummary s;
  s.samples = e.size();
  if (e.empty()) return s;
  for (double v : e) {
    s.mean_pct += v;
    s.max_pct = std::max(s.max_pct, v);
  }
  s.mean_pct /= static_cast<double>(e.size());
  if (e.size() > 1) {
    double acc = 0.0;
    for (double v : e) acc += (v - s.mean_pct) * (v - s.mean_pct);
    s.sd_pct = std::sqrt(acc / static_cast<double>(e.size() - 1));
  }
  return s;
}

struct SolveRow {
  int trial;
  double t, xa, va, xo, vo, err;
};

// Analytic vs adaptive-integration comparison for one IC on the oracle grid.
// The error is |x_analytic - x_oracle| as a percentage of the trajectory's
// peak |x_oracle|, which stays meaningful through zero crossings.
inline std::vector<SolveRow> compare_trajectory(const AnalyticSolution& base, const MathieuSystem& s, int trial,
                                                double x0, double v0, double horizon,
                                                const IntegrationConfig& cfg) {
  std::vector<SolveRow> rows;
  if (horizon == 0.0) {
    rows.push_back({trial, 0.0, x0, v0, x0, v0, 0.0});
    return rows;
  }
  const auto oracle = integrate(s, x0, v0, horizon, cfg);
  const AnalyticSolution sol = fitted(base, x0, v0);
  double peak = 0.0;
  for (double x : oracle.positions) peak = std::max(peak, std::abs(x));
  for (std::size_t j = 0; j < oracle.times.size(); ++j) {
    const PhaseState a = sol.evaluate(oracle.times[j]);
    const double diff = std::abs(a.x - oracle.positions[j]);
    const double err = peak > 0.0 ? 100.0 * diff / peak : (diff == 0.0 ? 0.0 : INFINITY);
    rows.push_back({trial, oracle.times[j], a.x, a.v, oracle.positions[j], oracle.velocities[j], err});
  }
  return rows;
}

inline std::vector<InitialCondition> solve_initial_conditions(const RunConfig& c) {
  if (!c.solve.initial_conditions.empty() && c.solve.random_trials == 0) return c.solve.initial_conditions;
  std::vector<InitialCondition> ics = c.solve.initial_conditions;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(-c.solve.x_bound_m, c.solve.x_bound_m);
  std::uniform_real_distribution<double> uv(-c.solve.v_bound_m_s, c.solve.v_bound_m_s);
  const int n = c.solve.random_trials > 0 ? c.solve.random_trials : (ics.empty() ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const double x0 = ux(rng);
    const double v0 = uv(rng);
    ics.push_back({x0, v0});
  }
  return ics;
}

inline ErrorSummary cmd_solve(const RunConfig& c, std::ostream& log = std::cout) {
  const auto dir = prepare_dir(c.output_dir);
  const MathieuSystem s = to_mathieu(c.model, c.surface);
  const AnalyticSolution base = make_solution(s, c.solver.terms, c.solver.hill_half_width);
  CsvWriter csv(dir / "solve.csv", {"trial", "t", "x_analytic", "v_analytic", "x_oracle", "v_oracle", "abs_pct_error"});
  std::vector<double> errors;
  const auto ics = solve_initial_conditions(c);
  for (std::size_t i = 0; i < ics.size(); ++i) {
    for (const auto& r : compare_trajectory(base, s, static_cast<int>(i), ics[i].x0_m, ics[i].v0_m_s, c.solve.horizon_s,
                                            c.solver.integration)) {
      csv.row({std::to_string(r.trial), fmt17(r.t), fmt17(r.xa), fmt17(r.va), fmt17(r.xo), fmt17(r.vo), fmt17(r.err)});
      errors.push_back(r.err);
    }
  }
  const ErrorSummary sum = summarize(errors);
  write_json(dir / "solve_summary.json",
             {{"trials", ics.size()},
              {"samples", sum.samples},
              {"terms", c.solver.terms},
              {"mu", {base.mu().real(), base.mu().imag()}},
              {"mean_abs_pct_error", sum.mean_pct},
              {"max_abs_pct_error", sum.max_pct},
              {"sd_abs_pct_error", sum.sd_pct}});
  char line[200];
  std::snprintf(line, sizeof line, "abs %% error over %zu samples: mean %.3e  max %.3e  sd %.3e\n", sum.samples,
                sum.mean_pct, sum.max_pct, sum.sd_pct);
  log << line;
  return sum;
}

inline std::vector<StabilityMapRow> cmd_stability_map(const RunConfig& c, std::ostream& log = std::cout) {
  const auto dir = prepare_dir(c.output_dir);
  const auto rows = stability_map(c.stability_map);
  CsvWriter csv(dir / "stability_map.csv", {"A_m", "omega_rad_s", "z0_m", "c0", "c1", "re_mu2", "bounded", "error"});
  std::size_t bounded = 0, failed = 0;
  for (const auto& r : rows) {
    csv.row({fmt17(r.amplitude_m), fmt17(r.omega_rad_s), fmt17(r.com_height_m), fmt17(r.c0), fmt17(r.c1),
             fmt17(r.re_mu2), r.bounded ? "true" : "false", r.error});
    bounded += r.bounded;
    failed += !r.error.empty();
  }
  log << rows.size() << " cells, " << bounded << " bounded, " << failed << " with errors\n";
  return rows;
}

inline json coefficients_json(const AnalyticSolution& s) {
  json c = json::array();
  for (const auto& v : s.coefficients().coeffs) c.push_back({v.real(), v.imag()});
  return c;
}

inline json plan_json(const RunConfig& c, const ComPlan& plan) {
  const GaitSpec& g = c.gait;
  json seq = json::array();
  for (Leg l : g.contact_sequence) seq.push_back(leg_name(l));
  json stance = json::array();
  for (const auto& fs : g.stance_positions) {
    json phase = json::array();
    for (const auto& f : fs) phase.push_back({f.x, f.y});
    stance.push_back(phase);
  }
  json phases = json::array();
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    const PhaseSpec& p = plan.phases[k];
    json poly = json::array();
    for (const auto& v : p.support_polygon) poly.push_back({v.x, v.y});
    const auto& sx = plan.x_solutions[k];
    const auto& sy = plan.y_solutions[k];
    const PhaseState x0 = sx.evaluate(p.start_s), y0 = sy.evaluate(p.start_s);
    json ph = {{"kind", p.kind == 0 ? "transition" : "swing"},
               {"swing_phase", p.kind == 0 ? json(nullptr) : json(p.kind)},
               {"swing_leg", p.swing_leg ? json(leg_name(*p.swing_leg)) : json(nullptr)},
               {"start_s", p.start_s},
               {"duration_s", p.duration_s},
               {"support_point_m", {p.cop_point.x, p.cop_point.y}},
               {"support_polygon_m", poly},
               {"initial_state", {{"x_m", x0.x}, {"y_m", y0.x}, {"vx_m_s", x0.v}, {"vy_m_s", y0.v}}},
               {"x_solution", {{"alpha1", {sx.alpha1().real(), sx.alpha1().imag()}},
                               {"alpha2", {sx.alpha2().real(), sx.alpha2().imag()}}}},
               {"y_solution", {{"alpha1", {sy.alpha1().real(), sy.alpha1().imag()}},
                               {"alpha2", {sy.alpha2().real(), sy.alpha2().imag()}}}}};
    phases.push_back(ph);
  }
  const auto& base = plan.x_solutions.front();
  json alpha = json::array();
  for (double v : plan.alpha) alpha.push_back(v);
  const auto& r = plan.report;
  return {{"schema_version", config_schema_version},
          {"gait",
           {{"period_s", g.gait_period_s},
            {"avg_velocity_m_s", {g.avg_velocity_m_s.x, g.avg_velocity_m_s.y}},
            {"step_length_m", g.step_length_m},
            {"max_step_height_m", g.max_step_height_m},
            {"friction_coeff", g.friction_coeff},
            {"com_height_m", g.com_height_m},
            {"contact_sequence", seq},
            {"stance_positions_m", stance},
            {"transition_fraction", g.transition_fraction},
            {"polygon_margin_m", g.polygon_margin_m}}},
          {"surface", {{"amplitude_m", c.surface.amplitude_m}, {"frequency_rad_s", c.surface.frequency_rad_s}}},
          {"solution",
           {{"mu", {base.mu().real(), base.mu().imag()}},
            {"terms", plan.order_N},
            {"coefficients", coefficients_json(base)}}},
          {"decision_vector", alpha},
          {"phases", phases},
          {"residuals",
           {{"feasible", r.feasible},
            {"max_continuity", r.max_continuity},
            {"max_velocity_defect", r.max_velocity_defect},
            {"min_friction_slack", r.min_friction_slack},
            {"min_polygon_slack", r.min_polygon_slack},
            {"min_box_slack", r.min_box_slack},
            {"refined_feasible", r.refined_feasible},
            {"refined_min_friction_slack", r.refined_min_friction_slack},
            {"refined_min_polygon_slack", r.refined_min_polygon_slack},
            {"diagnostic", r.diagnostic}}},
          {"optimizer",
           {{"converged", plan.optimizer.status == MinimizeStatus::converged},
            {"outer_iterations", plan.optimizer.outer_iterations},
            {"evaluations", plan.optimizer.evaluations}}}};
}

struct PlanOutcome {
  ComPlan com;
  FullBodyPlan body;
};

inline PlanOutcome cmd_plan(const RunConfig& c, std::ostream& log = std::cout) {
  validate_gait(c.gait, c.surface);
  const auto dir = prepare_dir(c.output_dir);
  PlanOutcome out;
  out.com = solve(c.gait, c.surface, c.model, c.plan.options);
  out.body = assemble(out.com, c.gait, c.surface, c.plan.sample_step_s, c.rotation, c.plan.bezier_order);
  write_json(dir / "plan.json", plan_json(c, out.com));
  std::vector<std::string> header{"t", "phase", "phase_kind", "s", "base_x_m", "base_y_m", "base_z_m",
                                  "base_vx_m_s", "base_vy_m_s", "base_vz_m_s", "roll_rad", "pitch_rad", "yaw_rad",
                                  "com_x_sc_m", "com_y_sc_m", "support_x_m", "support_y_m", "surface_z_m"};
  for (int l = 0; l < 4; ++l)
    for (const char* ax : {"x", "y", "z"})
      header.push_back(std::string("foot_") + leg_name(static_cast<Leg>(l)) + "_" + ax + "_m");
  CsvWriter csv(dir / "plan_samples.csv", header);
  for (const auto& s : out.body.samples) {
    std::vector<std::string> row{fmt17(s.t), std::to_string(s.clock.phase), std::to_string(s.clock.kind), fmt17(s.clock.s),
                                 fmt17(s.base_position.x), fmt17(s.base_position.y), fmt17(s.base_position.z),
                                 fmt17(s.base_velocity.x), fmt17(s.base_velocity.y), fmt17(s.base_velocity.z),
                                 fmt17(s.base_orientation.x), fmt17(s.base_orientation.y), fmt17(s.base_orientation.z),
                                 fmt17(s.com_relative.x), fmt17(s.com_relative.y), fmt17(s.support_point.x),
                                 fmt17(s.support_point.y), fmt17(s.support_point.z)};
    for (const auto& f : s.feet) {
      row.push_back(fmt17(f.x));
      row.push_back(fmt17(f.y));
      row.push_back(fmt17(f.z));
    }
    csv.row(row);
  }
  const auto& r = out.com.report;
  log << (r.feasible ? "feasible" : "INFEASIBLE") << " plan: continuity " << r.max_continuity << ", velocity defect "
      << r.max_velocity_defect << ", friction slack " << r.min_friction_slack << ", polygon slack " << r.min_polygon_slack
      << (r.diagnostic.empty() ? "" : ", " + r.diagnostic) << '\n';
  return out;
}

inline BenchReport cmd_bench(const RunConfig& c, std::ostream& log = std::cout) {
  const auto dir = prepare_dir(c.output_dir);
  BenchSettings b;
  b.trials = c.bench_trials;
  b.terms = c.solver.terms;
  b.seed = c.seed;
  b.horizon_s = c.solve.horizon_s > 0.0 ? c.solve.horizon_s : 0.5;
  b.integration = c.solver.integration;
  const BenchReport r = run_bench(c.model, c.surface, &c.gait, b);
  auto stats = [](const TimingStats& t) { return json{{"mean_ms", t.mean_ms}, {"sd_ms", t.sd_ms}, {"trials", t.trials}}; };
  write_json(dir / "bench.json", {{"analytic_evaluation", stats(r.analytic)},
                                  {"tabulated_evaluation", stats(r.tabulated)},
                                  {"table_setup_ms", r.table_setup_ms},
                                  {"oracle_integration", stats(r.oracle)},
                                  {"plan_analytic", stats(r.plan_analytic)},
                                  {"plan_oracle", stats(r.plan_oracle)},
                                  {"trajectory_speedup", r.trajectory_speedup()},
                                  {"tabulated_speedup", r.tabulated_speedup()},
                                  {"planner_speedup", r.planner_speedup()}});
  char buf[160];
  auto line = [&](const char* name, const TimingStats& t) {
    std::snprintf(buf, sizeof buf, "%-34s %10.4f ms +- %.4f  (n=%d)\n", name, t.mean_ms, t.sd_ms, t.trials);
    log << buf;
  };
  line("analytic evaluation / trial", r.analytic);
  line("tabulated-basis evaluation / trial", r.tabulated);
  line("oracle integration / trial", r.oracle);
  line("planning, analytic trajectories", r.plan_analytic);
  line("planning, oracle trajectories", r.plan_oracle);
  std::snprintf(buf, sizeof buf, "speedup: trajectory %.2fx (tabulated %.2fx), planner %.2fx\n", r.trajectory_speedup(),
                r.tabulated_speedup(), r.planner_speedup());
  log << buf;
  return r;
}

// Exit status for a failure kind.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return 2;
    case ErrorKind::infeasible: return 3;
    case ErrorKind::io: return 1;
    default: return 4;
  }
}

}  // namespace drslip
