#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "com_planner.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "pendulum.hpp"

namespace drslip {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
};

inline double bernstein_eval(const std::vector<double>& cp, double s) {
  // de Casteljau; returns the end control points exactly at s = 0 and 1
  std::vector<double> b = cp;
  for (std::size_t r = 1; r < b.size(); ++r)
    for (std::size_t i = 0; i + r < b.size(); ++i) b[i] = (1.0 - s) * b[i] + s * b[i + 1];
  return b[0];
}

inline double bernstein_derivative(const std::vector<double>& cp, double s) {
  const std::size_t n = cp.size() - 1;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(n) * (cp[i + 1] - cp[i]);
  return bernstein_eval(d, s);
}

struct BezierSegment {
  int order_n = 6;
  std::array<std::vector<double>, 3> control_points;  // x, y, z
  Vec3 start_point, end_point;

  Vec3 operator()(double s) const {
    return {bernstein_eval(control_points[0], s), bernstein_eval(control_points[1], s),
            bernstein_eval(control_points[2], s)};
  }
  Vec3 derivative(double s) const {
    return {bernstein_derivative(control_points[0], s), bernstein_derivative(control_points[1], s),
            bernstein_derivative(control_points[2], s)};
  }
};

namespace detail {

// Horizontal progress profile: control fractions from 0 to 1. Phases 1 and 3
// leave quickly (large first fraction), phases 2 and 4 gently.
inline std::vector<double> progress_profile(int n, bool fast) {
  double f1 = fast ? std::max(0.35, 2.1 / n) : std::min(0.12, 1.4 / n);
  double f2 = fast ? std::max(0.55, f1 + (1.0 - f1) / (n - 1)) : std::max(0.30, f1 + (1.0 - f1) / (n - 1) * 0.5);
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  p[0] = 0.0;
  p[1] = f1;
  if (n >= 3) p[2] = f2;
  for (int k = 3; k < n; ++k) p[static_cast<std::size_t>(k)] = f2 + (1.0 - f2) * (k - 2) / (n - 2);
  p[static_cast<std::size_t>(n)] = 1.0;
  return p;
}

// Lift profile with unit apex at s = 0.5: w_0 = w_n = 0, w_1 fixed by the
// requested initial slope, middle points equal (a) and w_{n-1} = b chosen so
// that w(0.5) = 1 and w'(0.5) = 0.
inline std::vector<double> lift_profile(int n, double initial_slope) {
  std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
  auto value = [&](const std::vector<double>& c) { return bernstein_eval(c, 0.5); };
  auto slope = [&](const std::vector<double>& c) { return bernstein_derivative(c, 0.5); };
  if (n == 3) {
    w[1] = w[2] = 4.0 / 3.0;
    return w;
  }
  auto build = [&](double a, double b, double w1) {
    std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
    c[1] = w1;
    for (int k = 2; k <= n - 2; ++k) c[static_cast<std::size_t>(k)] = a;
    c[static_cast<std::size_t>(n - 1)] = b;
    return c;
  };
  const double w1 = initial_slope / n;
  const auto c0 = build(0, 0, w1), ca = build(1, 0, 0), cb = build(0, 1, 0);
  const double v0 = value(c0), va = value(ca), vb = value(cb);
  const double d0 = slope(c0), da = slope(ca), db = slope(cb);
  const double det = va * db - vb * da;
  const double a = ((1.0 - v0) * db - vb * (-d0)) / det;
  const double b = (va * (-d0) - (1.0 - v0) * da) / det;
  return build(a, b, w1);
}

}  // namespace detail

inline constexpr double fast_lift_slope = 2.5;
inline constexpr double gentle_lift_slope = 1.0;

// Swing foot from start to end with an apex of max_height above the line
// between them. phase_kind 1 or 3 leaves fast, 2 or 4 gently.
inline BezierSegment make_swing_segment(Vec3 start, Vec3 end, int phase_kind, double max_height, int order_n = 6) {
  if (order_n < 3) fail(ErrorKind::validation, "Bezier order must be >= 3");
  if (!(max_height > 0.0)) fail(ErrorKind::validation, "max height must be > 0");
  if (phase_kind < 1 || phase_kind > 4) fail(ErrorKind::validation, "phase kind must be 1..4");
  const bool fast = phase_kind == 1 || phase_kind == 3;
  const auto p = detail::progress_profile(order_n, fast);
  const auto w = detail::lift_profile(order_n, fast ? fast_lift_slope : gentle_lift_slope);

  // the requested shaping must survive: slopes and a single apex at s = 0.5
  const double xs = order_n * p[1], zs = order_n * w[1];
  const bool slope_ok = fast ? (xs >= 2.0 && zs >= 2.0) : (xs <= 1.5 && zs <= 1.5);
  bool apex_ok = true;
  for (int i = 0; i <= 2000 && apex_ok; ++i) {
    const double v = bernstein_eval(w, i / 2000.0);
    apex_ok = v <= 1.0 + 1e-12 && v >= -1e-12;
  }
  if (!slope_ok || !apex_ok)
    fail(ErrorKind::infeasible, "swing shaping not achievable with Bezier order " + std::to_string(order_n));

  BezierSegment seg;
  seg.order_n = order_n;
  seg.start_point = start;
  seg.end_point = end;
  const double s0[3] = {start.x, start.y, start.z}, s1[3] = {end.x, end.y, end.z};
  for (int axis = 0; axis < 3; ++axis) {
    auto& cp = seg.control_points[static_cast<std::size_t>(axis)];
    cp.resize(static_cast<std::size_t>(order_n + 1));
    const double d = s1[axis] - s0[axis];
    for (int k = 0; k <= order_n; ++k) {
      double v = s0[axis] + p[static_cast<std::size_t>(k)] * d;
      if (axis == 2) v += max_height * w[static_cast<std::size_t>(k)];
      cp[static_cast<std::size_t>(k)] = v;
    }
    cp.front() = s0[axis];
    cp.back() = s1[axis];
  }
  return seg;
}

struct PhaseClock {
  std::size_t phase = 0;
  int kind = 0;
  double s = 0.0;
};

inline double local_s(const PhaseSpec& p, double t) { return (t - p.start_s) / p.duration_s; }

// Phases are half-open [start, end); time wraps modulo the cycle.
inline PhaseClock phase_clock(const std::vector<PhaseSpec>& phases, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::validation, "phase clock needs t >= 0");
  const double period = phases.back().end_s();
  double tc = std::fmod(t, period);
  std::size_t k = 0;
  while (k + 1 < phases.size() && tc >= phases[k].end_s()) ++k;
  return {k, phases[k].kind, std::clamp(local_s(phases[k], tc), 0.0, 1.0)};
}

// roll, pitch, yaw of the surface as a function of time
using SurfaceAngleFn = std::function<Vec3(double)>;

struct SurfaceRotation {
  double roll_amplitude_rad = 0.0;
  double pitch_amplitude_rad = 0.0;
  double frequency_rad_s = pi;

  Vec3 operator()(double t) const {
    const double s = std::sin(frequency_rad_s * t);
    return {roll_amplitude_rad * s, pitch_amplitude_rad * s, 0.0};
  }
};

inline Vec3 base_orientation(const SurfaceAngleFn& angle, double t) {
  if (!angle) return {};
  return angle(t);
}

inline Vec3 base_position(const ComPlan& plan, const SurfaceMotion& m, double t) {
  const ComSample c = plan.at(t);
  const Vec3 rws{c.cop.x, c.cop.y, surface_kinematics(m, t).z_m};
  return Vec3{c.x, c.y, plan.com_height_m} + rws;
}

struct FullBodySample {
  double t = 0.0;
  PhaseClock clock;
  Vec3 com_relative;     // r_sc
  Vec3 support_point;    // r_ws
  Vec3 base_position;    // r_b = r_sc + r_ws
  Vec3 base_velocity;
  Vec3 base_orientation;
  std::array<Vec3, 4> feet{};  // surface frame, indexed by Leg
  std::optional<Leg> swing_leg;
};

struct SwingSegment {
  Leg leg;
  std::size_t phase;
  BezierSegment curve;
};

struct FullBodyPlan {
  std::vector<FullBodySample> samples;
  std::vector<SwingSegment> swings;
  double period_s = 0.0;

  // foot position relative to the current support point
  Vec3 foot_relative(std::size_t sample, Leg leg) const {
    const auto& s = samples[sample];
    const Vec3 f = s.feet[static_cast<std::size_t>(leg)];
    return {f.x - s.support_point.x, f.y - s.support_point.y, f.z};
  }
};

inline FullBodyPlan assemble(const ComPlan& plan, const GaitSpec& g, const SurfaceMotion& m,
                             double sample_step_s = 0.005, const SurfaceAngleFn& angle = {},
                             int bezier_order = 6) {
  if (!(sample_step_s > 0.0)) fail(ErrorKind::validation, "sample step must be > 0");
  FullBodyPlan out;
  out.period_s = plan.period_s;
  const auto& ph = plan.phases;
  auto lift = [](Vec2 p) { return Vec3{p.x, p.y, 0.0}; };
  for (std::size_t k = 0; k < ph.size(); ++k) {
    if (ph[k].is_transition()) continue;
    const Leg leg = *ph[k].swing_leg;
    const auto i = static_cast<std::size_t>(ph[k].swing_index);
    const Vec2 from = ph[k].feet[static_cast<std::size_t>(leg)];
    const Vec2 to = feet_at(g, i + 1)[static_cast<std::size_t>(leg)];
    out.swings.push_back({leg, k, make_swing_segment(lift(from), lift(to), ph[k].kind, g.max_step_height_m, bezier_order)});
  }
  const auto steps = static_cast<long>(std::llround(plan.period_s / sample_step_s));
  for (long i = 0; i <= steps; ++i) {
    FullBodySample s;
    s.t = std::min(plan.period_s, i * sample_step_s);
    const ComSample c = plan.at(s.t);
    const PhaseSpec& p = ph[c.phase];
    s.clock = {c.phase, p.kind, std::clamp(local_s(p, s.t), 0.0, 1.0)};
    const SurfaceState ws = surface_kinematics(m, s.t);
    s.com_relative = {c.x, c.y, plan.com_height_m};
    s.support_point = {c.cop.x, c.cop.y, ws.z_m};
    s.base_position = s.com_relative + s.support_point;
    s.base_velocity = {c.vx, c.vy, ws.zdot_m_s};
    s.base_orientation = base_orientation(angle, s.t);
    for (std::size_t l = 0; l < 4; ++l) s.feet[l] = lift(p.feet[l]);
    if (!p.is_transition()) {
      s.swing_leg = p.swing_leg;
      for (const auto& sw : out.swings)
        if (sw.phase == c.phase) s.feet[static_cast<std::size_t>(sw.leg)] = sw.curve(s.clock.s);
    }
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace drslip
