#include <cmath>

#include <gtest/gtest.h>

#include "drslip/com_planner.hpp"

using namespace drslip;

namespace {

const SurfaceMotion drs1{0.10, pi};
const SurfaceMotion drs3_vertical{0.11, pi};

template <class F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

// Holds the relative CoM still at its initial position.
class FrozenModel : public TrajectoryModel {
 public:
  FrozenModel(const std::vector<PhaseSpec>& phases, int samples) { make_times(phases, samples); }
  void propagate(std::size_t phase, AxisState s, double* pos, AxisState& end) const override {
    for (std::size_t j = 0; j < times_[phase].size(); ++j) pos[j] = s.x;
    end = {s.x, 0.0};
  }
};

// Shared across tests: planning is deterministic, so one solve per setup.
const ComPlan& g1_plan() {
  static const ComPlan p = solve(gait_g1(), drs1, ModelParams{});
  return p;
}
const ComPlan& g2_plan() {
  static const ComPlan p = solve(gait_g2(), drs3_vertical, ModelParams{});
  return p;
}

}  // namespace

TEST(BuildPhases, G1Durations) {
  const auto ph = build_phases(gait_g1(), drs1);
  ASSERT_EQ(ph.size(), 6u);
  const double want[] = {0.45, 0.05, 0.5, 0.45, 0.05, 0.5};
  const int kinds[] = {1, 0, 2, 3, 0, 4};
  double sum = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(ph[k].duration_s, want[k], 1e-12) << k;
    EXPECT_EQ(ph[k].kind, kinds[k]);
    if (k) {
      EXPECT_DOUBLE_EQ(ph[k].start_s, ph[k - 1].end_s());
    }
    sum += ph[k].duration_s;
  }
  EXPECT_NEAR(sum, 2.0, 1e-15);
  EXPECT_EQ(ph.back().end_s(), 2.0);
}

TEST(BuildPhases, PolygonsAndSupportPoints) {
  for (const auto& g : {gait_g1(), gait_g2(), table_gait(0.0, 0.0)}) {
    for (const auto& p : build_phases(g, drs1)) {
      EXPECT_GE(p.support_polygon.size(), 3u);
      EXPECT_GT(signed_area(p.support_polygon), 0.0);
      // convex: every turn is to the left
      const auto& poly = p.support_polygon;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()], c = poly[(i + 2) % poly.size()];
        EXPECT_GT(cross(b - a, c - b), 0.0);
      }
      EXPECT_TRUE(strictly_inside(p.support_polygon, p.cop_point));
      EXPECT_EQ(p.support_polygon.size(), p.is_transition() ? 4u : 3u);
    }
  }
}

TEST(BuildPhases, IntegerQuotient) {
  EXPECT_NO_THROW(validate_gait(gait_g1(), drs1));
  GaitSpec g = gait_g1();
  g.gait_period_s = 1.0;  // quotient 2
  g.stance_positions = straight_walk_stance(g);
  EXPECT_NO_THROW(validate_gait(g, drs1));
  g.gait_period_s = 1.5;
  g.stance_positions = straight_walk_stance(g);
  EXPECT_EQ(kind_of([&] { build_phases(g, drs1); }), ErrorKind::validation);
}

TEST(BuildPhases, CollinearStanceFeet) {
  GaitSpec g = table_gait(0.0, 0.0);
  for (auto& fs : g.stance_positions) {
    fs[static_cast<std::size_t>(Leg::FL)] = {0.2, 0.0};
    fs[static_cast<std::size_t>(Leg::FR)] = {0.0, 0.0};
    fs[static_cast<std::size_t>(Leg::RL)] = {-0.2, 0.0};
  }
  EXPECT_EQ(kind_of([&] { build_phases(g, drs1); }), ErrorKind::degenerate_geometry);
}

TEST(BuildPhases, InvalidSequence) {
  GaitSpec g = gait_g1();
  g.contact_sequence = {Leg::RL, Leg::RL, Leg::RR, Leg::FL};
  EXPECT_EQ(kind_of([&] { build_phases(g, drs1); }), ErrorKind::validation);
  EXPECT_EQ(kind_of([] { parse_leg("XX"); }), ErrorKind::validation);
}

TEST(EvaluateConstraints, ForwardPropagatedStartsAreContinuous) {
  const GaitSpec g = gait_g1();
  const auto ph = build_phases(g, drs1);
  ModelParams p;
  const auto model = make_model(ModelKind::analytic, p, drs1, ph, 25, 10);
  DecisionVector a{};
  a[0] = 0.01;
  a[1] = -0.02;
  a[2] = 0.05;
  a[3] = 0.03;
  // propagate swing k (and its transition) and re-express in the next swing's frame
  for (int pass = 0; pass < 3; ++pass) {
    const auto tr = simulate(a, ph, *model);
    for (std::size_t k = 0; k + 1 < ph.size(); ++k) {
      if (ph[k + 1].is_transition()) continue;
      const Vec2 w = ph[k].cop_point + Vec2{tr[k].end[0], tr[k].end[1]} - ph[k + 1].cop_point;
      const auto i = static_cast<std::size_t>(4 * ph[k + 1].swing_index);
      a[i] = w.x;
      a[i + 1] = w.y;
      a[i + 2] = tr[k].end[2];
      a[i + 3] = tr[k].end[3];
    }
  }
  const auto cv = constraint_values(a, ph, g, *model);
  ASSERT_EQ(cv.continuity.size(), 16u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(cv.continuity[i], 0.0, 1e-10) << i;
  const auto [eq, ineq] = evaluate_constraints(a, ph, g, *model);
  EXPECT_EQ(eq.size(), 18u);
  EXPECT_EQ(ineq.size(), cv.friction.size() + cv.polygon.size() + cv.box.size());
}

TEST(EvaluateConstraints, FrictionBoundary) {
  GaitSpec g = gait_g1();
  const auto ph = build_phases(g, drs1);
  const FrozenModel model(ph, 25);
  DecisionVector a{};
  for (std::size_t k = 0; k < 4; ++k) a[4 * k] = 0.21;
  const auto cv = constraint_values(a, ph, g, model);
  // transitions re-express the state about a new support point, so only swing samples sit on the cone
  std::size_t idx = 0;
  for (std::size_t k = 0; k < ph.size(); ++k) {
    for (std::size_t j = 0; j < model.sample_times()[k].size(); ++j, ++idx) {
      if (ph[k].is_transition()) continue;
      EXPECT_EQ(cv.friction[idx], 0.0) << k;
    }
  }
  EXPECT_EQ(idx, cv.friction.size());
}

TEST(EvaluateConstraints, CentroidKeepsPolygonMargin) {
  const GaitSpec g = gait_g1();
  const auto ph = build_phases(g, drs1);
  const FrozenModel model(ph, 25);
  // support points are centroids by default, so zero offset puts the CoM there
  const auto cv = constraint_values(DecisionVector{}, ph, g, model);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < ph.size(); ++k) {
    if (ph[k].is_transition()) {
      idx += model.sample_times()[k].size();
      continue;
    }
    EXPECT_EQ(ph[k].cop_point, centroid(ph[k].support_polygon));
    for (std::size_t j = 0; j < model.sample_times()[k].size(); ++j, ++idx) EXPECT_GE(cv.polygon[idx], 0.0) << k;
  }
}

TEST(Solve, G1OnDrs1IsFeasible) {
  const auto& plan = g1_plan();
  const auto& r = plan.report;
  EXPECT_TRUE(r.feasible) << r.diagnostic;
  EXPECT_TRUE(r.refined_feasible);
  EXPECT_LT(r.max_continuity, 1e-6);
  EXPECT_GE(r.min_friction_slack, -1e-6);
  EXPECT_GE(r.min_polygon_slack, -1e-6);
  EXPECT_GE(r.refined_min_polygon_slack, -1e-6);
  const double dx = plan.samples.back().world.x - plan.samples.front().world.x;
  const double dy = plan.samples.back().world.y - plan.samples.front().world.y;
  EXPECT_NEAR(dx, 0.10, 1e-6);
  EXPECT_NEAR(dy, 0.0, 1e-6);
}

TEST(Solve, G2OnVerticalDrs3IsFeasible) {
  const auto& plan = g2_plan();
  EXPECT_TRUE(plan.report.feasible) << plan.report.diagnostic;
  EXPECT_TRUE(plan.report.refined_feasible);
  EXPECT_NEAR(plan.samples.back().world.x - plan.samples.front().world.x, 0.12, 1e-6);
}

TEST(Solve, StandingGaitIsFeasibleAndStationary) {
  const auto plan = solve(table_gait(0.0, 0.0), drs1, ModelParams{});
  EXPECT_TRUE(plan.report.feasible) << plan.report.diagnostic;
  EXPECT_NEAR(plan.samples.back().world.x - plan.samples.front().world.x, 0.0, 1e-6);
  EXPECT_NEAR(plan.samples.back().world.y - plan.samples.front().world.y, 0.0, 1e-6);
  // the CoM stays near the support polygons' centroids
  for (const auto& s : plan.samples) EXPECT_LT(std::hypot(s.x, s.y), 0.1);
}

TEST(Solve, WorldTrajectoryContinuousAcrossPhases) {
  const auto& plan = g1_plan();
  for (std::size_t k = 0; k + 1 < plan.phases.size(); ++k) {
    const double t = plan.phases[k].end_s();
    const auto a = plan.x_solutions[k].evaluate(t), b = plan.x_solutions[k + 1].evaluate(t);
    const auto c = plan.y_solutions[k].evaluate(t), d = plan.y_solutions[k + 1].evaluate(t);
    const Vec2 wa = plan.phases[k].cop_point + Vec2{a.x, c.x};
    const Vec2 wb = plan.phases[k + 1].cop_point + Vec2{b.x, d.x};
    EXPECT_LT(norm(wa - wb), 1e-6) << k;
    EXPECT_LT(std::hypot(a.v - b.v, c.v - d.v), 1e-6) << k;
  }
}

TEST(Solve, PhasesAgreeWithIntegration) {
  const auto& plan = g1_plan();
  ModelParams p;
  const auto ode = PendulumOde::from(p, drs1);
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    const auto& ph = plan.phases[k];
    const auto s0 = plan.x_solutions[k].evaluate(ph.start_s);
    std::vector<double> ts;
    for (int j = 0; j <= 50; ++j) ts.push_back(ph.start_s + ph.duration_s * j / 50.0);
    const auto num = integrate_at(ode, ph.start_s, s0.x, s0.v, ts);
    double peak = 0.0, dev = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      peak = std::max(peak, std::abs(num[j][0]));
      dev = std::max(dev, std::abs(plan.x_solutions[k].evaluate(ts[j]).x - num[j][0]));
    }
    EXPECT_LT(100.0 * dev / peak, 0.05) << k;
  }
}

TEST(Solve, Deterministic) {
  const auto again = solve(gait_g1(), drs1, ModelParams{});
  EXPECT_EQ(again.alpha, g1_plan().alpha);
  ASSERT_EQ(again.samples.size(), g1_plan().samples.size());
  for (std::size_t i = 0; i < again.samples.size(); ++i) EXPECT_EQ(again.samples[i].x, g1_plan().samples[i].x);
}

TEST(Solve, ConstantHeightAndHorizon) {
  const auto& plan = g1_plan();
  EXPECT_EQ(plan.com_height_m, 0.42);
  EXPECT_EQ(plan.samples.front().t, 0.0);
  EXPECT_EQ(plan.samples.back().t, 2.0);
  EXPECT_EQ(kind_of([&] { plan.at(2.5); }), ErrorKind::out_of_horizon);
}

TEST(Solve, OracleModelAgrees) {
  PlannerOptions opt;
  opt.model = ModelKind::oracle;
  const auto plan = solve(gait_g1(), drs1, ModelParams{}, opt);
  EXPECT_TRUE(plan.report.feasible) << plan.report.diagnostic;
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(plan.alpha[i], g1_plan().alpha[i], 1e-5) << i;
}

TEST(Solve, ImpossibleFrictionIsReported) {
  GaitSpec g = gait_g1();
  g.friction_coeff = 0.01;
  PlannerOptions opt;
  opt.minimize.max_outer = 15;
  const auto plan = solve(g, drs1, ModelParams{}, opt);
  EXPECT_FALSE(plan.report.feasible);
  EXPECT_FALSE(plan.report.diagnostic.empty());
}
