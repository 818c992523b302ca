#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace drslip {

inline constexpr double pi = std::numbers::pi;

// Vertical sinusoidal surface motion z_ws(t) = A sin(wt). No phase offset:
// shift time instead.
struct SurfaceMotion {
  double amplitude_m = 0.0;
  double frequency_rad_s = pi;

  double period_s() const { return 2.0 * pi / frequency_rad_s; }

  void validate() const {
    if (!std::isfinite(amplitude_m) || amplitude_m < 0.0)
      fail(ErrorKind::validation, "surface amplitude must be finite and >= 0");
    if (!std::isfinite(frequency_rad_s) || frequency_rad_s <= 0.0)
      fail(ErrorKind::validation, "surface frequency must be finite and > 0");
  }
};

struct ModelParams {
  double com_height_m = 0.42;
  double gravity_m_s2 = 9.81;
  double mass_kg = 25.0;
  double friction_coeff = 0.5;

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(com_height_m)) fail(ErrorKind::validation, "com height must be > 0");
    if (!positive(gravity_m_s2)) fail(ErrorKind::validation, "gravity must be > 0");
    if (!positive(mass_kg)) fail(ErrorKind::validation, "mass must be > 0");
    if (!positive(friction_coeff)) fail(ErrorKind::validation, "friction coefficient must be > 0");
  }
};

// CoM relative to the support point; the height is the constant com height.
struct PendulumState {
  double x_sc_m = 0.0;
  double y_sc_m = 0.0;
  double vx_sc_m_s = 0.0;
  double vy_sc_m_s = 0.0;
  double t_s = 0.0;
};

// x'' + (c0 - 2 c1 cos 2tau) x = 0 with tau = (pi + 2wt)/4.
struct MathieuSystem {
  double c0 = 0.0;
  double c1 = 0.0;
  double omega_rad_s = pi;

  double to_tau(double t) const { return (pi + 2.0 * omega_rad_s * t) / 4.0; }
  double to_time(double tau) const { return (4.0 * tau - pi) / (2.0 * omega_rad_s); }
  // dtau/dt
  double tau_rate() const { return omega_rad_s / 2.0; }
  double q(double tau) const { return c0 - 2.0 * c1 * std::cos(2.0 * tau); }
};

struct SurfaceState {
  double z_m;
  double zdot_m_s;
  double zddot_m_s2;
};

inline SurfaceState surface_kinematics(const SurfaceMotion& m, double t) {
  const double w = m.frequency_rad_s;
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  return {m.amplitude_m * s, m.amplitude_m * w * c, -m.amplitude_m * w * w * s};
}

inline MathieuSystem to_mathieu(const ModelParams& p, const SurfaceMotion& m) {
  p.validate();
  if (m.frequency_rad_s == 0.0)
    fail(ErrorKind::validation, "surface frequency 0 leaves the time map undefined");
  m.validate();
  const double w = m.frequency_rad_s;
  return {-4.0 * p.gravity_m_s2 / (w * w * p.com_height_m),
          2.0 * m.amplitude_m / p.com_height_m, w};
}

inline double time_map(const MathieuSystem& s, double t) { return s.to_tau(t); }
inline double inverse_time_map(const MathieuSystem& s, double tau) { return s.to_time(tau); }

inline constexpr double degenerate_cos_tolerance = 1e-9;

// Leg force along the pendulum axis. Throws on lift-off (the surface drops
// faster than gravity) and on a horizontal leg.
inline double axial_force(const ModelParams& p, const PendulumState& st,
                          const SurfaceMotion& m) {
  const double z0 = p.com_height_m;
  const double r2 = st.x_sc_m * st.x_sc_m + st.y_sc_m * st.y_sc_m;
  const double cos_theta = z0 / std::sqrt(r2 + z0 * z0);
  if (!(cos_theta > degenerate_cos_tolerance))
    fail(ErrorKind::degenerate_geometry, "leg angle too close to horizontal");
  const double load = surface_kinematics(m, st.t_s).zddot_m_s2 + p.gravity_m_s2;
  if (load < 0.0) fail(ErrorKind::lift_off, "surface acceleration exceeds gravity: lift-off");
  return p.mass_kg * load / cos_theta;
}

}  // namespace drslip
