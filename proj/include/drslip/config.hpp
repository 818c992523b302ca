#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "body_planner.hpp"
#include "com_planner.hpp"
#include "error.hpp"
#include "floquet.hpp"
#include "ode.hpp"
#include "pendulum.hpp"

namespace drslip {

using json = nlohmann::json;

inline constexpr int config_schema_version = 1;

struct InitialCondition {
  double x0_m = 0.0;
  double v0_m_s = 0.0;
};

struct SolveSettings {
  double horizon_s = 0.5;
  std::vector<InitialCondition> initial_conditions;
  int random_trials = 0;
  double x_bound_m = 0.2;
  double v_bound_m_s = 0.2;
};

struct SolverSettings {
  int terms = 10;
  int hill_half_width = 15;
  IntegrationConfig integration{};
};

struct PlanSettings {
  PlannerOptions options{};
  int bezier_order = 6;
  double sample_step_s = 0.005;
};

struct RunConfig {
  ModelParams model{};
  SurfaceMotion surface{0.07, pi};
  SurfaceRotation rotation{};
  GaitSpec gait = gait_g1();
  SolverSettings solver{};
  SolveSettings solve{};
  PlanSettings plan{};
  StabilityMapRequest stability_map{};
  int bench_trials = 100;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

namespace detail {

// Object accessor that remembers which keys were read so leftovers can be
// rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::validation, path_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorKind::validation, "unknown key " + path_ + "." + it.key());
  }
  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const json& at(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  double number(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (!v.is_number()) fail(ErrorKind::validation, path_ + "." + k + " must be a number");
    return v.get<double>();
  }
  int integer(const std::string& k, int fallback) {
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) fail(ErrorKind::validation, path_ + "." + k + " must be an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (!v.is_boolean()) fail(ErrorKind::validation, path_ + "." + k + " must be a boolean");
    return v.get<bool>();
  }
  std::string text(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (!v.is_string()) fail(ErrorKind::validation, path_ + "." + k + " must be a string");
    return v.get<std::string>();
  }
  std::string path(const std::string& k) const { return path_ + "." + k; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Vec2 read_vec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(ErrorKind::validation, where + " must be a [x, y] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline GridRange read_range(const json& j, const std::string& where, GridRange r) {
  Section s(j, where);
  r.lo = s.number("lo", r.lo);
  r.hi = s.number("hi", r.hi);
  r.count = s.integer("count", r.count);
  r.open_lower = s.boolean("open_lower", r.open_lower);
  return r;
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
  RunConfig c;
  detail::Section top(root, "config");
  const int version = top.integer("schema_version", -1);
  if (version != config_schema_version)
    fail(ErrorKind::validation, "schema_version must be " + std::to_string(config_schema_version));
  if (top.has("model")) {
    detail::Section s(top.at("model"), "model");
    c.model.com_height_m = s.number("com_height_m", c.model.com_height_m);
    c.model.gravity_m_s2 = s.number("gravity_m_s2", c.model.gravity_m_s2);
    c.model.mass_kg = s.number("mass_kg", c.model.mass_kg);
    c.model.friction_coeff = s.number("friction_coeff", c.model.friction_coeff);
  }
  c.model.validate();
  if (top.has("surface")) {
    detail::Section s(top.at("surface"), "surface");
    c.surface.amplitude_m = s.number("amplitude_m", c.surface.amplitude_m);
    c.surface.frequency_rad_s = s.number("frequency_rad_s", c.surface.frequency_rad_s);
    c.rotation.roll_amplitude_rad = s.number("roll_amplitude_rad", 0.0);
    c.rotation.pitch_amplitude_rad = s.number("pitch_amplitude_rad", 0.0);
  }
  c.surface.validate();
  c.rotation.frequency_rad_s = c.surface.frequency_rad_s;

  GaitSpec& g = c.gait;
  g.com_height_m = c.model.com_height_m;
  g.friction_coeff = c.model.friction_coeff;
  if (top.has("gait")) {
    detail::Section s(top.at("gait"), "gait");
    g.gait_period_s = s.number("period_s", g.gait_period_s);
    if (s.has("avg_velocity_m_s")) g.avg_velocity_m_s = detail::read_vec2(s.at("avg_velocity_m_s"), s.path("avg_velocity_m_s"));
    g.step_length_m = s.number("step_length_m", g.step_length_m);
    g.max_step_height_m = s.number("max_step_height_m", g.max_step_height_m);
    g.transition_fraction = s.number("transition_fraction", g.transition_fraction);
    g.polygon_margin_m = s.number("polygon_margin_m", g.polygon_margin_m);
    if (s.has("contact_sequence")) {
      const json& seq = s.at("contact_sequence");
      if (!seq.is_array() || seq.size() != 4)
        fail(ErrorKind::validation, "gait.contact_sequence must list four legs");
      for (std::size_t i = 0; i < 4; ++i) {
        if (!seq[i].is_string()) fail(ErrorKind::validation, "gait.contact_sequence entries must be strings");
        g.contact_sequence[i] = parse_leg(seq[i].get<std::string>());
      }
    }
    StanceLayout lay;
    if (s.has("stance_layout")) {
      detail::Section l(s.at("stance_layout"), s.path("stance_layout"));
      lay.half_length_m = l.number("half_length_m", lay.half_length_m);
      lay.half_width_m = l.number("half_width_m", lay.half_width_m);
    }
    if (s.has("stance_positions_m")) {
      // four phases, each listing FL, FR, RL, RR
      const json& sp = s.at("stance_positions_m");
      if (!sp.is_array() || sp.size() != 4) fail(ErrorKind::validation, "gait.stance_positions_m must have 4 phases");
      for (std::size_t k = 0; k < 4; ++k) {
        if (!sp[k].is_array() || sp[k].size() != 4)
          fail(ErrorKind::validation, "each stance phase must list 4 feet (FL, FR, RL, RR)");
        for (std::size_t l = 0; l < 4; ++l)
          g.stance_positions[k][l] = detail::read_vec2(sp[k][l], "gait.stance_positions_m");
      }
    } else {
      g.stance_positions = straight_walk_stance(g, lay);
    }
    if (s.has("cop_overrides_m")) {
      const json& co = s.at("cop_overrides_m");
      if (!co.is_array() || co.size() != 4) fail(ErrorKind::validation, "gait.cop_overrides_m must have 4 entries");
      for (std::size_t k = 0; k < 4; ++k)
        if (!co[k].is_null()) g.cop_overrides[k] = detail::read_vec2(co[k], "gait.cop_overrides_m");
    }
  } else {
    g.stance_positions = straight_walk_stance(g);
  }

  if (top.has("solver")) {
    detail::Section s(top.at("solver"), "solver");
    c.solver.terms = s.integer("terms", c.solver.terms);
    c.solver.hill_half_width = s.integer("hill_half_width", c.solver.hill_half_width);
    c.solver.integration.rel_tol = s.number("rel_tol", c.solver.integration.rel_tol);
    c.solver.integration.abs_tol = s.number("abs_tol", c.solver.integration.abs_tol);
    c.solver.integration.output_step_s = s.number("output_step_s", c.solver.integration.output_step_s);
    c.solver.integration.max_steps = s.integer("max_steps", static_cast<int>(std::min<long>(c.solver.integration.max_steps, 2'000'000'000)));
  }
  if (c.solver.terms < 0) fail(ErrorKind::validation, "solver.terms must be >= 0");
  if (c.solver.hill_half_width < 1) fail(ErrorKind::validation, "solver.hill_half_width must be >= 1");
  c.solver.integration.validate();

  PlannerOptions& po = c.plan.options;
  po.order_N = c.solver.terms;
  if (top.has("planner")) {
    detail::Section s(top.at("planner"), "planner");
    const std::string model = s.text("model", "analytic");
    if (model == "analytic") po.model = ModelKind::analytic;
    else if (model == "oracle") po.model = ModelKind::oracle;
    else fail(ErrorKind::validation, "planner.model must be 'analytic' or 'oracle'");
    po.samples_per_phase = s.integer("samples_per_phase", po.samples_per_phase);
    po.box.position_m = s.number("position_bound_m", po.box.position_m);
    po.box.velocity_m_s = s.number("velocity_bound_m_s", po.box.velocity_m_s);
    po.regularization = s.number("regularization", po.regularization);
    po.tolerance = s.number("tolerance", po.tolerance);
    po.report_step_s = s.number("report_step_s", po.report_step_s);
    c.plan.bezier_order = s.integer("bezier_order", c.plan.bezier_order);
    c.plan.sample_step_s = s.number("sample_step_s", c.plan.sample_step_s);
  }
  if (po.samples_per_phase < 2) fail(ErrorKind::validation, "planner.samples_per_phase must be >= 2");
  if (!(po.tolerance > 0.0)) fail(ErrorKind::validation, "planner.tolerance must be > 0");
  if (!(c.plan.sample_step_s > 0.0) || !(po.report_step_s > 0.0))
    fail(ErrorKind::validation, "planner sample steps must be > 0");

  if (top.has("solve")) {
    detail::Section s(top.at("solve"), "solve");
    c.solve.horizon_s = s.number("horizon_s", c.solve.horizon_s);
    c.solve.random_trials = s.integer("random_trials", c.solve.random_trials);
    c.solve.x_bound_m = s.number("x_bound_m", c.solve.x_bound_m);
    c.solve.v_bound_m_s = s.number("v_bound_m_s", c.solve.v_bound_m_s);
    if (s.has("initial_conditions")) {
      const json& ics = s.at("initial_conditions");
      if (!ics.is_array()) fail(ErrorKind::validation, "solve.initial_conditions must be an array");
      for (const auto& ic : ics) {
        detail::Section e(ic, "solve.initial_conditions[]");
        c.solve.initial_conditions.push_back({e.number("x0_m", 0.0), e.number("v0_m_s", 0.0)});
      }
    }
  }
  if (!(c.solve.horizon_s >= 0.0)) fail(ErrorKind::validation, "solve.horizon_s must be >= 0");
  if (c.solve.random_trials < 0) fail(ErrorKind::validation, "solve.random_trials must be >= 0");

  if (top.has("stability_map")) {
    detail::Section s(top.at("stability_map"), "stability_map");
    auto& r = c.stability_map;
    if (s.has("amplitude_m")) r.amplitude_m = detail::read_range(s.at("amplitude_m"), s.path("amplitude_m"), r.amplitude_m);
    if (s.has("omega_rad_s")) r.omega_rad_s = detail::read_range(s.at("omega_rad_s"), s.path("omega_rad_s"), r.omega_rad_s);
    if (s.has("com_height_m")) r.com_height_m = detail::read_range(s.at("com_height_m"), s.path("com_height_m"), r.com_height_m);
  }
  c.stability_map.gravity_m_s2 = c.model.gravity_m_s2;
  if (top.has("bench")) {
    detail::Section s(top.at("bench"), "bench");
    c.bench_trials = s.integer("trials", c.bench_trials);
  }
  if (c.bench_trials < 1) fail(ErrorKind::validation, "bench.trials must be >= 1");
  if (top.has("seed")) {
    const json& v = top.at("seed");
    if (!v.is_number_unsigned()) fail(ErrorKind::validation, "seed must be a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (top.has("output")) {
    detail::Section s(top.at("output"), "output");
    c.output_dir = s.text("dir", c.output_dir);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace drslip
