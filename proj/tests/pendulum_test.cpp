#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "drslip/pendulum.hpp"

using namespace drslip;

namespace {

SurfaceMotion drs(double a, double w) { return SurfaceMotion{a, w}; }

ModelParams reference_model() { return ModelParams{}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;  // sentinel: nothing thrown
}

}  // namespace

TEST(SurfaceKinematics, ZeroAmplitudeIsStill) {
  const auto s = surface_kinematics(drs(0.0, pi), 1.3);
  EXPECT_EQ(s.z_m, 0.0);
  EXPECT_EQ(s.zdot_m_s, 0.0);
  EXPECT_EQ(s.zddot_m_s2, 0.0);
}

TEST(SurfaceKinematics, StartOfCycle) {
  const auto s = surface_kinematics(drs(0.07, pi), 0.0);
  EXPECT_EQ(s.z_m, 0.0);
  EXPECT_DOUBLE_EQ(s.zdot_m_s, 0.07 * pi);
  EXPECT_EQ(s.zddot_m_s2, 0.0);
}

TEST(SurfaceKinematics, QuarterCycle) {
  const auto s = surface_kinematics(drs(0.07, pi), 0.5);
  EXPECT_NEAR(s.z_m, 0.07, 1e-15);
  EXPECT_NEAR(s.zdot_m_s, 0.0, 1e-15);
  EXPECT_NEAR(s.zddot_m_s2, -0.6908, 1e-4);
  EXPECT_NEAR(s.zddot_m_s2, -0.07 * pi * pi, 1e-15);
}

TEST(SurfaceKinematics, AccelerationIsMinusOmegaSquaredHeight) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.0, 1.0), uw(0.1, 2 * pi), ut(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const auto m = drs(ua(rng), uw(rng));
    const auto s = surface_kinematics(m, ut(rng));
    const double w = m.frequency_rad_s;
    EXPECT_NEAR(s.zddot_m_s2, -w * w * s.z_m, 1e-12 * (1.0 + w * w * m.amplitude_m));
  }
}

TEST(ToMathieu, ZeroAmplitudeGivesZeroC1) {
  EXPECT_EQ(to_mathieu(reference_model(), drs(0.0, pi)).c1, 0.0);
}

TEST(ToMathieu, ReferenceParameters) {
  const auto s = to_mathieu(reference_model(), drs(0.07, pi));
  EXPECT_NEAR(s.c0, -9.4663, 5e-5);
  EXPECT_NEAR(s.c1, 0.33333, 5e-6);
  EXPECT_DOUBLE_EQ(s.c0, -4.0 * 9.81 / (pi * pi * 0.42));
  EXPECT_DOUBLE_EQ(s.c1, 2.0 * 0.07 / 0.42);
}

TEST(ToMathieu, FastSurface) {
  const auto s = to_mathieu(reference_model(), drs(0.10, 2 * pi));
  EXPECT_NEAR(s.c0, -2.3666, 5e-5);
  EXPECT_NEAR(s.c1, 0.47619, 5e-6);
}

TEST(ToMathieu, RejectsZeroFrequency) {
  EXPECT_EQ(kind_of([] { to_mathieu(reference_model(), drs(0.07, 0.0)); }), ErrorKind::validation);
}

TEST(ToMathieu, RejectsInvalidInputs) {
  ModelParams p;
  p.com_height_m = -1.0;
  EXPECT_EQ(kind_of([&] { to_mathieu(p, drs(0.07, pi)); }), ErrorKind::validation);
  EXPECT_EQ(kind_of([] { to_mathieu(ModelParams{}, drs(-0.1, pi)); }), ErrorKind::validation);
}

TEST(ToMathieu, SignsForPhysicalInputs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ua(0.0, 1.0), uw(0.01, 10.0), uz(0.1, 1.0), ug(1.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    ModelParams p;
    p.com_height_m = uz(rng);
    p.gravity_m_s2 = ug(rng);
    const double a = i % 10 == 0 ? 0.0 : ua(rng);
    const auto s = to_mathieu(p, drs(a, uw(rng)));
    EXPECT_LT(s.c0, 0.0);
    EXPECT_GE(s.c1, 0.0);
    EXPECT_EQ(s.c1 == 0.0, a == 0.0);
  }
}

TEST(TimeMap, KnownPoints) {
  const auto s = to_mathieu(reference_model(), drs(0.07, pi));
  EXPECT_DOUBLE_EQ(time_map(s, 0.0), pi / 4);
  EXPECT_DOUBLE_EQ(time_map(s, 0.5), pi / 2);
}

TEST(TimeMap, RoundTripAndMonotone) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ut(-100.0, 100.0), uw(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    MathieuSystem s{-1.0, 0.1, uw(rng)};
    const double t = ut(rng);
    EXPECT_NEAR(inverse_time_map(s, time_map(s, t)), t, 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(t)) * (1 + 1 / s.omega_rad_s));
    EXPECT_GT(time_map(s, t + 1e-6), time_map(s, t));
  }
}

TEST(AxialForce, UprightStaticLeg) {
  EXPECT_DOUBLE_EQ(axial_force(reference_model(), PendulumState{}, drs(0.0, pi)), 245.25);
}

TEST(AxialForce, SurfaceAccelerationPeak) {
  PendulumState st;
  st.t_s = 0.5;  // sin(wt) = 1: largest downward acceleration
  const double f = axial_force(reference_model(), st, drs(0.10, pi));
  EXPECT_NEAR(f, 220.6, 0.05);
  EXPECT_NEAR(f, 25.0 * (9.81 - 0.10 * pi * pi), 1e-12);
}

TEST(AxialForce, StaticSurfaceIsWeightAtAllTimes) {
  for (double t : {0.0, 0.3, 1.7, 12.5}) {
    PendulumState st;
    st.t_s = t;
    EXPECT_EQ(axial_force(reference_model(), st, drs(0.0, 2.0)), 25.0 * 9.81);
  }
}

TEST(AxialForce, LiftOffAndDegenerateGeometry) {
  PendulumState st;
  st.t_s = 0.25;  // w = 2pi, sin = 1
  EXPECT_EQ(kind_of([&] { axial_force(reference_model(), st, drs(0.5, 2 * pi)); }), ErrorKind::lift_off);
  PendulumState flat;
  flat.x_sc_m = 1e12;
  EXPECT_EQ(kind_of([&] { axial_force(reference_model(), flat, drs(0.0, pi)); }), ErrorKind::degenerate_geometry);
}

TEST(AxialForce, InvariantUnderVerticalAxisRotation) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ur(-0.3, 0.3), uang(0.0, 2 * pi), ut(0.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    PendulumState a;
    a.x_sc_m = ur(rng);
    a.y_sc_m = ur(rng);
    a.t_s = ut(rng);
    const double th = uang(rng);
    PendulumState b = a;
    b.x_sc_m = std::cos(th) * a.x_sc_m - std::sin(th) * a.y_sc_m;
    b.y_sc_m = std::sin(th) * a.x_sc_m + std::cos(th) * a.y_sc_m;
    const auto m = drs(0.07, pi);
    EXPECT_NEAR(axial_force(reference_model(), a, m), axial_force(reference_model(), b, m), 1e-11);
  }
}
