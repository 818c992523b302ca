#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "mathieu.hpp"
#include "ode.hpp"
#include "optimize.hpp"
#include "pendulum.hpp"

namespace drslip {

enum class Leg { FL = 0, FR = 1, RL = 2, RR = 3 };

inline const char* leg_name(Leg l) {
  static const char* names[] = {"FL", "FR", "RL", "RR"};
  return names[static_cast<int>(l)];
}

inline Leg parse_leg(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (s == leg_name(static_cast<Leg>(i))) return static_cast<Leg>(i);
  fail(ErrorKind::validation, "unknown leg identifier '" + s + "'");
}

using FootSet = std::array<Vec2, 4>;  // indexed by Leg

struct GaitSpec {
  double friction_coeff = 0.5;
  double com_height_m = 0.42;
  double gait_period_s = 2.0;
  Vec2 avg_velocity_m_s{0.05, 0.0};
  double step_length_m = 0.10;
  double max_step_height_m = 0.05;
  std::array<Leg, 4> contact_sequence{Leg::RL, Leg::FR, Leg::RR, Leg::FL};
  // surface-frame foot positions at the start of each swing phase
  std::array<FootSet, 4> stance_positions{};
  // optional per-swing-phase support point; the polygon centroid otherwise
  std::array<std::optional<Vec2>, 4> cop_overrides{};
  double transition_fraction = 0.1;  // of the quarter period
  double polygon_margin_m = 0.0025;

  // Displacement of every foot over one cycle.
  Vec2 cycle_step() const {
    const double v = norm(avg_velocity_m_s);
    if (v == 0.0) return {0.0, 0.0};
    return (step_length_m / v) * avg_velocity_m_s;
  }
};

struct StanceLayout {
  double half_length_m = 0.2;
  double half_width_m = 0.13;
};

// Feet of a straight walk: each leg sits at its nominal body offset, shifted
// back by the part of the step it has not taken yet. The leg swinging in
// phase j starts at nominal + step ((j + 0.5)/4 - 0.5) and lands one step on.
inline std::array<FootSet, 4> straight_walk_stance(const GaitSpec& g, const StanceLayout& lay = {}) {
  const Vec2 step = g.cycle_step();
  FootSet nominal{Vec2{lay.half_length_m, lay.half_width_m}, Vec2{lay.half_length_m, -lay.half_width_m},
                  Vec2{-lay.half_length_m, lay.half_width_m}, Vec2{-lay.half_length_m, -lay.half_width_m}};
  std::array<FootSet, 4> out{};
  for (int j = 0; j < 4; ++j) {
    const int leg = static_cast<int>(g.contact_sequence[static_cast<std::size_t>(j)]);
    const Vec2 start = nominal[static_cast<std::size_t>(leg)] + ((j + 0.5) / 4.0 - 0.5) * step;
    for (int k = 0; k < 4; ++k)
      out[static_cast<std::size_t>(k)][static_cast<std::size_t>(leg)] = k > j ? start + step : start;
  }
  return out;
}

inline GaitSpec table_gait(double speed_m_s, double step_m, const StanceLayout& lay = {}) {
  GaitSpec g;
  g.avg_velocity_m_s = {speed_m_s, 0.0};
  g.step_length_m = step_m;
  g.stance_positions = straight_walk_stance(g, lay);
  return g;
}

inline GaitSpec gait_g1() { return table_gait(0.05, 0.10); }
inline GaitSpec gait_g2() { return table_gait(0.06, 0.12); }

struct PhaseSpec {
  int kind = 0;  // 1..4 swing phase number, 0 four-leg transition
  double start_s = 0.0;
  double duration_s = 0.0;
  Polygon support_polygon;
  Vec2 cop_point;
  int swing_index = -1;  // 0..3 for swing phases, index of the preceding swing for transitions
  std::optional<Leg> swing_leg;
  FootSet feet{};  // feet at phase start (the swing foot at lift-off)

  double end_s() const { return start_s + duration_s; }
  bool is_transition() const { return kind == 0; }
};

inline void validate_gait(const GaitSpec& g, const SurfaceMotion& m) {
  m.validate();
  if (!(g.gait_period_s > 0.0) || !std::isfinite(g.gait_period_s))
    fail(ErrorKind::validation, "gait period must be > 0");
  if (!(g.friction_coeff > 0.0)) fail(ErrorKind::validation, "friction coefficient must be > 0");
  if (!(g.com_height_m > 0.0)) fail(ErrorKind::validation, "com height must be > 0");
  if (!(g.max_step_height_m > 0.0)) fail(ErrorKind::validation, "max step height must be > 0");
  if (!(g.step_length_m >= 0.0)) fail(ErrorKind::validation, "step length must be >= 0");
  if (!(g.transition_fraction >= 0.0 && g.transition_fraction < 1.0))
    fail(ErrorKind::validation, "transition fraction must be in [0, 1)");
  if (!(g.polygon_margin_m >= 0.0)) fail(ErrorKind::validation, "polygon margin must be >= 0");
  if (norm(g.avg_velocity_m_s) == 0.0 && g.step_length_m != 0.0)
    fail(ErrorKind::validation, "a nonzero step needs a nonzero average velocity");
  const double q = m.period_s() / g.gait_period_s;
  if (std::abs(q - std::round(q)) > 1e-9 || std::round(q) < 1.0)
    fail(ErrorKind::validation, "surface period / gait period must be an integer");
  std::array<bool, 4> seen{};
  for (Leg l : g.contact_sequence) seen[static_cast<std::size_t>(l)] = true;
  for (bool s : seen)
    if (!s) fail(ErrorKind::validation, "contact sequence must list each leg once");
  // only the swinging foot may move between consecutive phases
  for (std::size_t k = 0; k + 1 < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l)
      if (static_cast<Leg>(l) != g.contact_sequence[k] &&
          !(g.stance_positions[k][l] == g.stance_positions[k + 1][l]))
        fail(ErrorKind::validation, std::string("stance foot ") + leg_name(static_cast<Leg>(l)) +
                                        " moves while in stance");
  // legs that stepped before phase 4 must sit one cycle step ahead of where
  // they started, so the next cycle repeats this one shifted
  const Vec2 step = g.cycle_step();
  for (std::size_t j = 0; j < 3; ++j) {
    const auto l = static_cast<std::size_t>(g.contact_sequence[j]);
    if (norm(g.stance_positions[3][l] - (g.stance_positions[0][l] + step)) > 1e-12)
      fail(ErrorKind::validation, "stance positions are not periodic with the cycle step");
  }
}

inline Polygon stance_polygon(const FootSet& feet, std::optional<Leg> swing) {
  std::vector<Vec2> pts;
  for (std::size_t l = 0; l < 4; ++l)
    if (!swing || static_cast<Leg>(l) != *swing) pts.push_back(feet[l]);
  Polygon h = convex_hull(pts);
  if (h.size() < 3 || std::abs(signed_area(h)) < 1e-9)
    fail(ErrorKind::degenerate_geometry, "support polygon is degenerate (collinear stance feet)");
  return h;
}

// Feet at the start of swing phase k, continuing into the next cycle for k = 4.
inline FootSet feet_at(const GaitSpec& g, std::size_t k) {
  if (k < 4) return g.stance_positions[k];
  FootSet f = g.stance_positions[0];
  for (auto& p : f) p = p + g.cycle_step();
  return f;
}

inline std::vector<PhaseSpec> build_phases(const GaitSpec& g, const SurfaceMotion& m) {
  validate_gait(g, m);
  const double quarter = g.gait_period_s / 4.0;
  const double tr = g.transition_fraction * quarter;
  std::array<Polygon, 5> polys;
  std::array<Vec2, 5> cops;
  for (std::size_t k = 0; k < 5; ++k) {
    const std::size_t kk = k % 4;
    polys[k] = stance_polygon(feet_at(g, k), g.contact_sequence[kk]);
    if (g.cop_overrides[kk]) {
      cops[k] = *g.cop_overrides[kk] + (k == 4 ? g.cycle_step() : Vec2{});
      if (!strictly_inside(polys[k], cops[k]))
        fail(ErrorKind::validation, "support point override lies outside its polygon");
    } else {
      cops[k] = centroid(polys[k]);
    }
  }
  std::vector<PhaseSpec> out;
  double t = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    // consecutive triangles touching along an edge only need a four-leg phase
    const bool transition = tr > 0.0 && overlap_area(polys[k], polys[k + 1]) < 1e-9;
    PhaseSpec sw;
    sw.kind = static_cast<int>(k) + 1;
    sw.start_s = t;
    sw.duration_s = transition ? quarter - tr : quarter;
    sw.support_polygon = polys[k];
    sw.cop_point = cops[k];
    sw.swing_index = static_cast<int>(k);
    sw.swing_leg = g.contact_sequence[k];
    sw.feet = feet_at(g, k);
    out.push_back(sw);
    t += sw.duration_s;
    if (transition) {
      PhaseSpec ph;
      ph.kind = 0;
      ph.start_s = t;
      ph.duration_s = tr;
      ph.feet = feet_at(g, k + 1);
      ph.support_polygon = stance_polygon(ph.feet, std::nullopt);
      ph.cop_point = 0.5 * (cops[k] + cops[k + 1]);
      ph.swing_index = static_cast<int>(k);
      if (!strictly_inside(ph.support_polygon, ph.cop_point))
        fail(ErrorKind::degenerate_geometry, "transition support point outside the four-leg polygon");
      out.push_back(ph);
      t += tr;
    }
  }
  // close the cycle exactly despite rounding in the running sum
  out.back().duration_s = g.gait_period_s - out.back().start_s;
  return out;
}

// Relative CoM state on one axis over one phase.
struct AxisState {
  double x;
  double v;
};

// Supplies the relative CoM trajectory of every phase from its initial state.
class TrajectoryModel {
 public:
  virtual ~TrajectoryModel() = default;
  // positions at the phase's sample times (first = start) and the end state
  virtual void propagate(std::size_t phase, AxisState start, double* positions,
                         AxisState& end) const = 0;
  const std::vector<std::vector<double>>& sample_times() const { return times_; }

 protected:
  std::vector<std::vector<double>> times_;

  void make_times(const std::vector<PhaseSpec>& phases, int samples) {
    if (samples < 2) fail(ErrorKind::validation, "need at least 2 samples per phase");
    times_.clear();
    for (const auto& p : phases) {
      std::vector<double> ts(static_cast<std::size_t>(samples));
      for (int j = 0; j < samples; ++j) ts[static_cast<std::size_t>(j)] = p.start_s + p.duration_s * j / (samples - 1);
      ts.back() = p.end_s();
      times_.push_back(std::move(ts));
    }
  }
};

// Closed-form trajectories. Each phase stores the 2x2 maps from its start
// state to every sample, so one evaluation is a handful of multiply-adds.
class AnalyticModel : public TrajectoryModel {
 public:
  AnalyticModel(const MathieuSystem& s, const std::vector<PhaseSpec>& phases, int samples, int order_N)
      : base_(make_solution(s, order_N)) {
    make_times(phases, samples);
    maps_.resize(phases.size());
    for (std::size_t k = 0; k < phases.size(); ++k) {
      const double t0 = phases[k].start_s;
      const Basis b0 = base_.basis(t0);
      const double r = s.tau_rate();
      // inverse of [[x1, x2], [x1' r, x2' r]] at the phase start
      const cplx a = b0.x1, bb = b0.x2, c = b0.dx1 * r, d = b0.dx2 * r;
      const cplx det = detail::checked_determinant(a, bb, c, d);
      const cplx i11 = d / det, i12 = -bb / det, i21 = -c / det, i22 = a / det;
      for (double t : times_[k]) {
        const Basis bt = base_.basis(t);
        const cplx p1 = bt.x1, p2 = bt.x2, q1 = bt.dx1 * r, q2 = bt.dx2 * r;
        Mat2 m{};
        m[0][0] = (p1 * i11 + p2 * i21).real();
        m[0][1] = (p1 * i12 + p2 * i22).real();
        m[1][0] = (q1 * i11 + q2 * i21).real();
        m[1][1] = (q1 * i12 + q2 * i22).real();
        maps_[k].push_back(m);
      }
    }
  }

  void propagate(std::size_t phase, AxisState s, double* pos, AxisState& end) const override {
    const auto& ms = maps_[phase];
    for (std::size_t j = 0; j < ms.size(); ++j) pos[j] = ms[j][0][0] * s.x + ms[j][0][1] * s.v;
    const Mat2& e = ms.back();
    end = {e[0][0] * s.x + e[0][1] * s.v, e[1][0] * s.x + e[1][1] * s.v};
  }

  const AnalyticSolution& solution() const { return base_; }

 private:
  AnalyticSolution base_;
  std::vector<std::vector<Mat2>> maps_;
};

// Adaptive numerical integration on every evaluation.
class OracleModel : public TrajectoryModel {
 public:
  OracleModel(const ModelParams& p, const SurfaceMotion& m, const std::vector<PhaseSpec>& phases,
              int samples, IntegrationConfig cfg = {})
      : ode_(PendulumOde::from(p, m)), cfg_(cfg), starts_() {
    make_times(phases, samples);
    for (const auto& ph : phases) starts_.push_back(ph.start_s);
  }

  void propagate(std::size_t phase, AxisState s, double* pos, AxisState& end) const override {
    const auto out = integrate_at(ode_, starts_[phase], s.x, s.v, times_[phase], cfg_);
    for (std::size_t j = 0; j < out.size(); ++j) pos[j] = out[j][0];
    end = {out.back()[0], out.back()[1]};
  }

 private:
  PendulumOde ode_;
  IntegrationConfig cfg_;
  std::vector<double> starts_;
};

using DecisionVector = std::array<double, 16>;  // per swing phase: x, y, vx, vy

struct PhaseTrace {
  std::array<double, 4> start{};  // x, y, vx, vy relative to the phase support point
  std::array<double, 4> end{};
  std::vector<double> xs, ys;     // relative positions at the sample times
};

struct ConstraintValues {
  std::vector<double> continuity;  // 16: three interior boundaries plus cycle closure
  std::array<double, 2> velocity{};
  std::vector<double> friction;
  std::vector<double> polygon;
  std::vector<double> box;

  Vector equalities() const {
    Vector e = continuity;
    e.push_back(velocity[0]);
    e.push_back(velocity[1]);
    return e;
  }
  Vector inequalities() const {
    Vector s = friction;
    s.insert(s.end(), polygon.begin(), polygon.end());
    s.insert(s.end(), box.begin(), box.end());
    return s;
  }
};

struct BoxBounds {
  double position_m = 0.3;
  double velocity_m_s = 0.5;
};

inline std::vector<PhaseTrace> simulate(const DecisionVector& alpha, const std::vector<PhaseSpec>& phases,
                                        const TrajectoryModel& model) {
  std::vector<PhaseTrace> tr(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    PhaseTrace& t = tr[k];
    const PhaseSpec& p = phases[k];
    if (p.is_transition()) {
      // continue the preceding swing's motion about the new support point
      const PhaseTrace& prev = tr[k - 1];
      const Vec2 shift = phases[k - 1].cop_point - p.cop_point;
      t.start = {prev.end[0] + shift.x, prev.end[1] + shift.y, prev.end[2], prev.end[3]};
    } else {
      const auto i = static_cast<std::size_t>(4 * p.swing_index);
      t.start = {alpha[i], alpha[i + 1], alpha[i + 2], alpha[i + 3]};
    }
    const std::size_t n = model.sample_times()[k].size();
    t.xs.resize(n);
    t.ys.resize(n);
    AxisState ex, ey;
    model.propagate(k, {t.start[0], t.start[2]}, t.xs.data(), ex);
    model.propagate(k, {t.start[1], t.start[3]}, t.ys.data(), ey);
    t.end = {ex.x, ey.x, ex.v, ey.v};
  }
  return tr;
}

inline ConstraintValues constraint_values(const DecisionVector& alpha, const std::vector<PhaseSpec>& phases,
                                          const GaitSpec& g, const TrajectoryModel& model,
                                          const BoxBounds& box = {}) {
  const auto tr = simulate(alpha, phases, model);
  ConstraintValues cv;
  const Vec2 step = g.cycle_step();
  // world-frame continuity into every swing phase (phase 1 of the next cycle closes the loop)
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const std::size_t nk = (k + 1) % phases.size();
    if (phases[nk].is_transition()) continue;
    const Vec2 next_cop = phases[nk].cop_point + (nk == 0 ? step : Vec2{});
    const Vec2 end_world = phases[k].cop_point + Vec2{tr[k].end[0], tr[k].end[1]};
    const Vec2 start_world = next_cop + Vec2{tr[nk].start[0], tr[nk].start[1]};
    cv.continuity.push_back(end_world.x - start_world.x);
    cv.continuity.push_back(end_world.y - start_world.y);
    cv.continuity.push_back(tr[k].end[2] - tr[nk].start[2]);
    cv.continuity.push_back(tr[k].end[3] - tr[nk].start[3]);
  }
  const Vec2 first = phases.front().cop_point + Vec2{tr.front().start[0], tr.front().start[1]};
  const Vec2 last = phases.back().cop_point + Vec2{tr.back().end[0], tr.back().end[1]};
  cv.velocity = {last.x - first.x - g.avg_velocity_m_s.x * g.gait_period_s,
                 last.y - first.y - g.avg_velocity_m_s.y * g.gait_period_s};
  for (std::size_t k = 0; k < phases.size(); ++k) {
    for (std::size_t j = 0; j < tr[k].xs.size(); ++j) {
      const double x = tr[k].xs[j], y = tr[k].ys[j];
      cv.friction.push_back(g.friction_coeff - std::hypot(x, y) / g.com_height_m);
      cv.polygon.push_back(edge_clearance(phases[k].support_polygon, phases[k].cop_point + Vec2{x, y}) -
                           g.polygon_margin_m);
    }
  }
  for (std::size_t i = 0; i < 16; ++i) {
    const double b = (i % 4) < 2 ? box.position_m : box.velocity_m_s;
    cv.box.push_back(b - alpha[i]);
    cv.box.push_back(alpha[i] + b);
  }
  return cv;
}

inline std::pair<Vector, Vector> evaluate_constraints(const DecisionVector& alpha,
                                                      const std::vector<PhaseSpec>& phases,
                                                      const GaitSpec& g, const TrajectoryModel& model,
                                                      const BoxBounds& box = {}) {
  const auto cv = constraint_values(alpha, phases, g, model, box);
  return {cv.equalities(), cv.inequalities()};
}

struct ResidualReport {
  double max_continuity = 0.0;
  double max_velocity_defect = 0.0;
  double min_friction_slack = 0.0;
  double min_polygon_slack = 0.0;
  double min_box_slack = 0.0;
  double refined_min_friction_slack = 0.0;  // at twice the sample count
  double refined_min_polygon_slack = 0.0;
  bool feasible = false;
  bool refined_feasible = false;
  std::string diagnostic;
};

enum class ModelKind { analytic, oracle };

struct PlannerOptions {
  ModelKind model = ModelKind::analytic;
  int samples_per_phase = 25;
  int order_N = 10;
  BoxBounds box{};
  double regularization = 1e-6;
  double tolerance = 1e-6;
  MinimizeOptions minimize{};
  double report_step_s = 0.005;
  bool check_refinement = true;
};

struct ComSample {
  double t = 0.0;
  std::size_t phase = 0;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;  // relative to the support point
  Vec2 cop;
  Vec2 world;  // horizontal CoM position in the surface frame
};

struct ComPlan {
  std::vector<PhaseSpec> phases;
  std::vector<AnalyticSolution> x_solutions, y_solutions;  // per phase, fitted at the phase start
  DecisionVector alpha{};
  std::vector<ComSample> samples;
  ResidualReport report;
  MinimizeResult optimizer;
  double com_height_m = 0.0;
  double period_s = 0.0;
  int order_N = 0;

  std::size_t phase_at(double t) const {
    for (std::size_t k = 0; k + 1 < phases.size(); ++k)
      if (t < phases[k].end_s()) return k;
    return phases.size() - 1;
  }
  // relative state (x, y, vx, vy) and support point at t in [0, period]
  ComSample at(double t) const {
    if (!(t >= 0.0 && t <= period_s * (1.0 + 1e-12)))
      fail(ErrorKind::out_of_horizon, "time outside the plan horizon");
    ComSample s;
    s.t = t;
    s.phase = phase_at(t);
    const PhaseState px = x_solutions[s.phase].evaluate(t), py = y_solutions[s.phase].evaluate(t);
    s.x = px.x;
    s.vx = px.v;
    s.y = py.x;
    s.vy = py.v;
    s.cop = phases[s.phase].cop_point;
    s.world = s.cop + Vec2{s.x, s.y};
    return s;
  }
};

inline std::unique_ptr<TrajectoryModel> make_model(ModelKind kind, const ModelParams& p, const SurfaceMotion& m,
                                                   const std::vector<PhaseSpec>& phases, int samples, int order_N) {
  if (kind == ModelKind::analytic)
    return std::make_unique<AnalyticModel>(to_mathieu(p, m), phases, samples, order_N);
  return std::make_unique<OracleModel>(p, m, phases, samples);
}

inline ResidualReport residual_report(const DecisionVector& alpha, const std::vector<PhaseSpec>& phases,
                                      const GaitSpec& g, const TrajectoryModel& model, const BoxBounds& box,
                                      double tol) {
  const auto cv = constraint_values(alpha, phases, g, model, box);
  ResidualReport r;
  for (double c : cv.continuity) r.max_continuity = std::max(r.max_continuity, std::abs(c));
  r.max_velocity_defect = std::max(std::abs(cv.velocity[0]), std::abs(cv.velocity[1]));
  r.min_friction_slack = *std::min_element(cv.friction.begin(), cv.friction.end());
  r.min_polygon_slack = *std::min_element(cv.polygon.begin(), cv.polygon.end());
  r.min_box_slack = *std::min_element(cv.box.begin(), cv.box.end());
  r.feasible = r.max_continuity < tol && r.max_velocity_defect < tol && r.min_friction_slack >= -tol &&
               r.min_polygon_slack >= -tol && r.min_box_slack >= -tol;
  if (!r.feasible) {
    // name the family with the largest violation
    const std::pair<double, const char*> fam[] = {{r.max_continuity, "continuity"},
                                                  {r.max_velocity_defect, "average velocity"},
                                                  {-r.min_friction_slack, "friction cone"},
                                                  {-r.min_polygon_slack, "support polygon"},
                                                  {-r.min_box_slack, "box bounds"}};
    const auto* worst = &fam[0];
    for (const auto& f : fam)
      if (f.first > worst->first) worst = &f;
    r.diagnostic = std::string("dominant violation: ") + worst->second + " (" + std::to_string(worst->first) + ")";
  }
  return r;
}

inline ComPlan solve(const GaitSpec& g, const SurfaceMotion& m, const ModelParams& params,
                     const PlannerOptions& opt = {}) {
  ModelParams p = params;
  p.com_height_m = g.com_height_m;
  p.friction_coeff = g.friction_coeff;
  p.validate();
  ComPlan plan;
  plan.phases = build_phases(g, m);
  plan.com_height_m = g.com_height_m;
  plan.period_s = g.gait_period_s;
  plan.order_N = opt.order_N;
  const auto model = make_model(opt.model, p, m, plan.phases, opt.samples_per_phase, opt.order_N);

  Vector x0(16, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    x0[4 * k + 2] = g.avg_velocity_m_s.x;
    x0[4 * k + 3] = g.avg_velocity_m_s.y;
  }
  auto problem = [&](const Vector& x) {
    DecisionVector a{};
    std::copy(x.begin(), x.end(), a.begin());
    const auto cv = constraint_values(a, plan.phases, g, *model, opt.box);
    Evaluation e;
    double sq = 0.0;
    for (double v : x) sq += v * v;
    e.cost = opt.regularization * sq;
    e.eq = cv.equalities();
    e.ineq = cv.inequalities();
    return e;
  };
  MinimizeOptions mo = opt.minimize;
  mo.constraint_tol = std::min(mo.constraint_tol, opt.tolerance);
  mo.central_differences = false;
  mo.fd_step = 1e-7;
  plan.optimizer = minimize(problem, x0, mo);
  std::copy(plan.optimizer.x.begin(), plan.optimizer.x.end(), plan.alpha.begin());

  plan.report = residual_report(plan.alpha, plan.phases, g, *model, opt.box, opt.tolerance);
  if (opt.check_refinement) {
    const auto fine = make_model(opt.model, p, m, plan.phases, 2 * opt.samples_per_phase - 1, opt.order_N);
    const auto rr = residual_report(plan.alpha, plan.phases, g, *fine, opt.box, opt.tolerance);
    plan.report.refined_min_friction_slack = rr.min_friction_slack;
    plan.report.refined_min_polygon_slack = rr.min_polygon_slack;
    plan.report.refined_feasible = rr.feasible;
  }

  // per-phase closed-form solutions from the optimized start states
  const MathieuSystem sys = to_mathieu(p, m);
  const AnalyticSolution base = make_solution(sys, opt.order_N);
  const auto traces = simulate(plan.alpha, plan.phases, *model);
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    const double t0 = plan.phases[k].start_s;
    plan.x_solutions.push_back(fitted(base, traces[k].start[0], traces[k].start[2], t0));
    plan.y_solutions.push_back(fitted(base, traces[k].start[1], traces[k].start[3], t0));
  }
  const auto steps = static_cast<long>(std::llround(g.gait_period_s / opt.report_step_s));
  for (long i = 0; i <= steps; ++i)
    plan.samples.push_back(plan.at(std::min(g.gait_period_s, i * opt.report_step_s)));
  return plan;
}

}  // namespace drslip
