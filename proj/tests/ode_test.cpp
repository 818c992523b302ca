#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "drslip/mathieu.hpp"
#include "drslip/ode.hpp"

using namespace drslip;

namespace {

MathieuSystem reference_system() { return to_mathieu(ModelParams{}, SurfaceMotion{0.07, pi}); }

// 40-digit Taylor-series reference (mpmath) for x(0.5), v(0.5) from (0.02, 0.1)
constexpr double x_at_half_ref = 0.21938121377710247522;
constexpr double v_at_half_ref = 1.026309279046850209;

IntegrationConfig tight(double tol) {
  IntegrationConfig c;
  c.rel_tol = tol;
  c.abs_tol = tol;
  return c;
}

template <class F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

}  // namespace

TEST(Integrate, EquilibriumStaysAtZero) {
  const auto r = integrate(reference_system(), 0.0, 0.0, 0.5);
  ASSERT_EQ(r.times.size(), 1001u);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    EXPECT_EQ(r.positions[i], 0.0);
    EXPECT_EQ(r.velocities[i], 0.0);
  }
}

TEST(Integrate, GridShape) {
  const auto r = integrate(reference_system(), 0.1, 0.0, 0.5);
  ASSERT_EQ(r.times.size(), r.positions.size());
  ASSERT_EQ(r.times.size(), r.velocities.size());
  EXPECT_EQ(r.times.front(), 0.0);
  EXPECT_NEAR(r.times.back(), 0.5, 1e-15);
  for (std::size_t i = 1; i < r.times.size(); ++i) EXPECT_GT(r.times[i], r.times[i - 1]);
  // off-grid horizon gets its own final sample
  const auto q = integrate(reference_system(), 0.1, 0.0, 0.01234);
  EXPECT_EQ(q.times.back(), 0.01234);
  EXPECT_EQ(q.times.size(), 26u);
}

// worst deviation from the closed form, relative to the trajectory peak
// (pointwise ratios blow up at zero crossings)
double static_surface_error(const IntegrationConfig& cfg, std::uint64_t seed) {
  const auto s = to_mathieu(ModelParams{}, SurfaceMotion{0.0, pi});
  const double lam = std::sqrt(9.81 / 0.42);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double x0 = u(rng), v0 = u(rng);
    const auto r = integrate(s, x0, v0, 0.5, cfg);
    double xpeak = 0.0, vpeak = 0.0, dx = 0.0, dv = 0.0;
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      const double t = r.times[j];
      const double xr = x0 * std::cosh(lam * t) + v0 / lam * std::sinh(lam * t);
      const double vr = x0 * lam * std::sinh(lam * t) + v0 * std::cosh(lam * t);
      xpeak = std::max(xpeak, std::abs(xr));
      vpeak = std::max(vpeak, std::abs(vr));
      dx = std::max(dx, std::abs(r.positions[j] - xr));
      dv = std::max(dv, std::abs(r.velocities[j] - vr));
    }
    worst = std::max({worst, dx / xpeak, dv / vpeak});
  }
  return worst;
}

TEST(Integrate, StaticSurfaceMatchesClosedForm) {
  EXPECT_LT(static_surface_error(tight(1e-10), 31), 1e-9);
  // at the default 1e-9 tolerances the global error is ~2e-9: local errors
  // grow with exp(lambda t), a factor ~11 over 0.5 s
  EXPECT_LT(static_surface_error(IntegrationConfig{}, 31), 5e-9);
}

TEST(Integrate, ReferenceRegressionFixture) {
  const auto r = integrate(reference_system(), 0.02, 0.1, 0.5, tight(1e-12));
  EXPECT_NEAR(r.positions.back(), x_at_half_ref, 1e-11);
  EXPECT_NEAR(r.velocities.back(), v_at_half_ref, 1e-10);
}

TEST(Integrate, TighterToleranceDoesNotDrift) {
  double prev = INFINITY;
  for (double tol = 1e-6; tol >= 1e-12; tol /= 2) {
    const auto r = integrate(reference_system(), 0.02, 0.1, 0.5, tight(tol));
    const double dev = std::abs(r.positions.back() - x_at_half_ref);
    // allow roundoff-level wobble once the error is at the floor
    EXPECT_LE(dev, std::max(prev, 1e-13)) << tol;
    prev = std::min(prev, dev);
  }
}

TEST(Integrate, MatchesPhysicalForm) {
  ModelParams p;
  const SurfaceMotion m{0.07, pi};
  const auto a = integrate(PendulumOde::from(p, m), 0.05, -0.02, 0.5);
  const auto b = integrate(to_mathieu(p, m), 0.05, -0.02, 0.5);
  for (std::size_t j = 0; j < a.times.size(); ++j) EXPECT_NEAR(a.positions[j], b.positions[j], 1e-14);
}

TEST(Integrate, Linearity) {
  const auto s = reference_system();
  const IntegrationConfig cfg;
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-0.2, 0.2), uk(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double x1 = u(rng), v1 = u(rng), x2 = u(rng), v2 = u(rng), a = uk(rng), b = uk(rng);
    const auto r1 = integrate(s, x1, v1, 0.5, cfg);
    const auto r2 = integrate(s, x2, v2, 0.5, cfg);
    const auto r = integrate(s, a * x1 + b * x2, a * v1 + b * v2, 0.5, cfg);
    for (std::size_t j = 0; j < r.times.size(); j += 10) {
      const double lin = a * r1.positions[j] + b * r2.positions[j];
      const double scale = std::abs(a * r1.positions[j]) + std::abs(b * r2.positions[j]) + 1e-3;
      EXPECT_NEAR(r.positions[j], lin, 10 * cfg.rel_tol * scale);
    }
  }
}

TEST(Integrate, ForcingEntersWithMinusSign) {
  // x'' = lam^2 x - f with f = lam^2 x_p for a constant x_p keeps x = x_p
  const auto s = to_mathieu(ModelParams{}, SurfaceMotion{0.0, pi});
  const double k = 9.81 / 0.42;
  const auto r = integrate(s, 0.03, 0.0, 0.5, IntegrationConfig{}, [k](double) { return k * 0.03; });
  for (double x : r.positions) EXPECT_NEAR(x, 0.03, 1e-12);
}

TEST(Integrate, Errors) {
  EXPECT_EQ(kind_of([] { integrate(reference_system(), 0.1, 0.0, 0.0); }), ErrorKind::validation);
  IntegrationConfig few;
  few.max_steps = 3;
  EXPECT_EQ(kind_of([&] { integrate(reference_system(), 0.1, 0.0, 5.0, few); }), ErrorKind::step_exhaustion);
  IntegrationConfig bad;
  bad.rel_tol = 0.0;
  EXPECT_EQ(kind_of([&] { integrate(reference_system(), 0.1, 0.0, 0.5, bad); }), ErrorKind::validation);
  const auto blowup = to_mathieu(ModelParams{}, SurfaceMotion{0.0, pi});
  EXPECT_EQ(kind_of([&] { integrate(blowup, 1e300, 1e300, 100.0); }), ErrorKind::nonfinite);
}

TEST(Integrate, AtArbitraryTimesMatchesGrid) {
  const auto ode = PendulumOde::from(reference_system());
  const auto grid = integrate(ode, 0.02, 0.1, 0.5);
  const std::vector<double> times{0.0, 0.1, 0.25, 0.5};
  const auto at = integrate_at(ode, 0.0, 0.02, 0.1, times);
  EXPECT_EQ(at[0][0], 0.02);
  EXPECT_NEAR(at[1][0], grid.positions[200], 1e-9);
  EXPECT_NEAR(at[2][0], grid.positions[500], 1e-9);
  EXPECT_NEAR(at[3][0], grid.positions[1000], 1e-9);
}

TEST(Monodromy, UnitDeterminant) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> ua(0.0, 1.0), uw(0.05, 2 * pi), uz(0.3, 0.55);
  for (int i = 0; i < 50; ++i) {
    ModelParams p;
    p.com_height_m = uz(rng);
    const auto m = monodromy(to_mathieu(p, SurfaceMotion{ua(rng), uw(rng)}));
    EXPECT_NEAR(m.determinant(), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(m.log_multipliers[0] + m.log_multipliers[1]), 0.0, 1e-9);
  }
}

TEST(Monodromy, StaticSurfaceClosedForm) {
  const auto s = to_mathieu(ModelParams{}, SurfaceMotion{0.0, pi});
  const double k = std::sqrt(-s.c0);
  const auto m = monodromy(s).matrix();
  const double ch = std::cosh(k * pi), sh = std::sinh(k * pi);
  EXPECT_NEAR(m[0][0], ch, 1e-10 * ch);
  EXPECT_NEAR(m[0][1], sh / k, 1e-10 * ch);
  EXPECT_NEAR(m[1][0], k * sh, 1e-10 * ch * k);
  EXPECT_NEAR(m[1][1], ch, 1e-10 * ch);
}

TEST(Monodromy, AgreesWithDirectColumns) {
  const auto s = reference_system();
  const auto a = monodromy(s).matrix();
  const auto b = monodromy_direct(s);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a[i][j], b[i][j], 1e-9 * std::abs(b[i][j]));
}

TEST(Monodromy, EigenvaluesMatchExponent) {
  const auto s = reference_system();
  const cplx mu = characteristic_exponent(s);
  const auto m = monodromy(s);
  EXPECT_NEAR(std::abs(std::exp(m.log_multipliers[0] - mu * pi) - 1.0), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(std::exp(m.log_multipliers[1] + mu * pi) - 1.0), 0.0, 1e-6);
}

TEST(Monodromy, OscillatorMultipliers) {
  // x'' + x = 0 over pi: M = -I
  const MathieuSystem s{1.0, 0.0, pi};
  const auto m = monodromy(s).matrix();
  EXPECT_NEAR(m[0][0], -1.0, 1e-10);
  EXPECT_NEAR(m[1][1], -1.0, 1e-10);
  EXPECT_NEAR(m[0][1], 0.0, 1e-10);
  EXPECT_NEAR(m[1][0], 0.0, 1e-10);
}
