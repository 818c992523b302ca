#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "error.hpp"
#include "pendulum.hpp"

namespace drslip {

struct IntegrationConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double output_step_s = 5e-4;
  long max_steps = 10'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      fail(ErrorKind::validation, "tolerances must be > 0");
    if (!(output_step_s > 0.0)) fail(ErrorKind::validation, "output step must be > 0");
    if (max_steps < 1) fail(ErrorKind::validation, "max_steps must be >= 1");
  }
};

struct TrajectorySamples {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> velocities;
};

namespace dp5 {

// Dormand-Prince 5(4) tableau
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension (Hairer's dopri5)
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dp5

// Adaptive Dormand-Prince integration of y' = f(t, y) from t0 to t1 (t1 > t0).
// `on_step(t_old, h, dense)` is called after every accepted step; `dense(theta)`
// interpolates the state at t_old + theta h with the pair's 4th-order
// continuous extension.
template <std::size_t D, class Rhs, class OnStep>
void integrate_dp5(Rhs&& f, double t0, std::array<double, D> y, double t1,
                   const IntegrationConfig& cfg, OnStep&& on_step) {
  using V = std::array<double, D>;
  auto axpy = [](V& out, const V& base, double h, std::initializer_list<std::pair<double, const V*>> terms) {
    for (std::size_t i = 0; i < D; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] = base[i] + h * acc;
    }
  };
  using namespace dp5;
  const double span = t1 - t0;
  V k1 = f(t0, y), k2, k3, k4, k5, k6, k7, tmp, ynew;

  // initial step (Hairer & Wanner II.4)
  double h;
  {
    double d0 = 0.0, dd1 = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      dd1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / D);
    dd1 = std::sqrt(dd1 / D);
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h0 * k1[i];
    const V f1 = f(t0 + h0, tmp);
    double d2 = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d2 += ((f1[i] - k1[i]) / sc) * ((f1[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / D) / h0;
    const double m = std::max(dd1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  double t = t0;
  long steps = 0;
  double err_old = 1e-4;
  bool rejected = false;
  while (t < t1) {
    if (++steps > cfg.max_steps) fail(ErrorKind::step_exhaustion, "integration step budget exhausted");
    bool last = false;
    if (t + h >= t1 || t + 1.0001 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    axpy(tmp, y, h, {{a21, &k1}});
    k2 = f(t + c2 * h, tmp);
    axpy(tmp, y, h, {{a31, &k1}, {a32, &k2}});
    k3 = f(t + c3 * h, tmp);
    axpy(tmp, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    k4 = f(t + c4 * h, tmp);
    axpy(tmp, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    k5 = f(t + c5 * h, tmp);
    axpy(tmp, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    k6 = f(t + h, tmp);
    axpy(ynew, y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    k7 = f(t + h, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / D);
    if (!std::isfinite(err)) {
      for (double v : ynew)
        if (!std::isfinite(v)) fail(ErrorKind::nonfinite, "state became nonfinite");
      err = 1e10;
    }

    if (err <= 1.0) {
      // PI step-size controller
      double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
      if (err == 0.0) fac = 5.0;
      fac = std::clamp(fac, 0.2, 5.0);
      if (rejected) fac = std::min(fac, 1.0);
      err_old = std::max(err, 1e-4);

      V r1 = y, r2, r3, r4, r5;
      for (std::size_t i = 0; i < D; ++i) {
        const double dy = ynew[i] - y[i];
        const double bspl = h * k1[i] - dy;
        r2[i] = dy;
        r3[i] = bspl;
        r4[i] = dy - h * k7[i] - bspl;
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      auto dense = [&](double theta) {
        V out;
        const double th1 = 1.0 - theta;
        for (std::size_t i = 0; i < D; ++i)
          out[i] = r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
        return out;
      };
      const double t_old = t;
      t = last ? t1 : t + h;
      y = ynew;
      k1 = k7;
      for (double v : y)
        if (!std::isfinite(v)) fail(ErrorKind::nonfinite, "state became nonfinite");
      if (!on_step(t_old, h, dense, y)) return;
      h *= fac;
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      rejected = true;
      if (h < 1e-14 * std::max(1.0, std::abs(t)))
        fail(ErrorKind::step_exhaustion, "step size underflow");
    }
  }
}

// Right-hand side of x'' = ((g - A w^2 sin wt)/z0) x - f(t) in physical time.
struct PendulumOde {
  double g_over_z0;
  double accel_over_z0;  // A w^2 / z0
  double omega;
  std::function<double(double)> forcing;

  static PendulumOde from(const ModelParams& p, const SurfaceMotion& m,
                          std::function<double(double)> forcing = {}) {
    const double w = m.frequency_rad_s;
    return {p.gravity_m_s2 / p.com_height_m, m.amplitude_m * w * w / p.com_height_m, w,
            std::move(forcing)};
  }
  // the same equation recovered from Mathieu coefficients
  static PendulumOde from(const MathieuSystem& s, std::function<double(double)> forcing = {}) {
    const double w = s.omega_rad_s;
    return {-s.c0 * w * w / 4.0, s.c1 * w * w / 2.0, w, std::move(forcing)};
  }

  std::array<double, 2> operator()(double t, const std::array<double, 2>& y) const {
    double a = (g_over_z0 - accel_over_z0 * std::sin(omega * t)) * y[0];
    if (forcing) a -= forcing(t);
    return {y[1], a};
  }
};

// Samples on the grid t0 + k*step (k = 0.. while <= t0 + horizon), plus
// the horizon end when it is not on the grid.
inline TrajectorySamples integrate(const PendulumOde& ode, double x0, double v0, double horizon_s,
                                   const IntegrationConfig& cfg = {}, double t0 = 0.0) {
  cfg.validate();
  if (!(horizon_s > 0.0)) fail(ErrorKind::validation, "horizon must be > 0");
  TrajectorySamples out;
  const double step = cfg.output_step_s;
  const long count = static_cast<long>(std::floor(horizon_s / step * (1.0 + 1e-12)));
  out.times.reserve(static_cast<std::size_t>(count + 2));
  for (long k = 0; k <= count; ++k) out.times.push_back(t0 + k * step);
  if (horizon_s - count * step > 1e-12 * horizon_s) out.times.push_back(t0 + horizon_s);
  out.positions.resize(out.times.size());
  out.velocities.resize(out.times.size());
  out.positions[0] = x0;
  out.velocities[0] = v0;
  std::size_t next = 1;
  const double t_end = out.times.back();
  integrate_dp5<2>(ode, t0, std::array<double, 2>{x0, v0}, t_end, cfg,
                   [&](double t_old, double h, const auto& dense, const std::array<double, 2>& y) {
                     const double t_new = t_old + h;
                     while (next < out.times.size() && out.times[next] <= t_new) {
                       std::array<double, 2> s;
                       if (next + 1 == out.times.size() && out.times[next] >= t_new - 1e-15 * std::abs(t_new))
                         s = y;
                       else
                         s = dense((out.times[next] - t_old) / h);
                       out.positions[next] = s[0];
                       out.velocities[next] = s[1];
                       ++next;
                     }
                     return true;
                   });
  return out;
}

inline TrajectorySamples integrate(const MathieuSystem& s, double x0, double v0, double horizon_s,
                                   const IntegrationConfig& cfg = {},
                                   std::function<double(double)> forcing = {}) {
  return integrate(PendulumOde::from(s, std::move(forcing)), x0, v0, horizon_s, cfg);
}

// State at the given (increasing) times only, starting from (x0, v0) at t0.
inline std::vector<std::array<double, 2>> integrate_at(const PendulumOde& ode, double t0, double x0,
                                                      double v0, const std::vector<double>& times,
                                                      const IntegrationConfig& cfg = {}) {
  std::vector<std::array<double, 2>> out(times.size());
  std::size_t next = 0;
  while (next < times.size() && times[next] <= t0) out[next++] = {x0, v0};
  if (next == times.size()) return out;
  integrate_dp5<2>(ode, t0, std::array<double, 2>{x0, v0}, times.back(), cfg,
                   [&](double t_old, double h, const auto& dense, const std::array<double, 2>& y) {
                     const double t_new = t_old + h;
                     while (next < times.size() && times[next] <= t_new) {
                       out[next] = (next + 1 == times.size()) ? y : dense((times[next] - t_old) / h);
                       ++next;
                     }
                     return true;
                   });
  return out;
}

// One-period state-transition matrix of x'' + q(tau) x = 0, tau in [0, pi].
// Entries may be astronomically large, so the matrix is kept as
// exp(log_scale) * scaled. det is carried separately as a log.
struct Monodromy {
  std::array<std::array<double, 2>, 2> scaled{};
  double log_scale = 0.0;
  double log_det = 0.0;
  // log of the Floquet multipliers, largest modulus first
  std::array<std::complex<double>, 2> log_multipliers{};

  std::array<std::array<double, 2>, 2> matrix() const {
    auto m = scaled;
    const double s = std::exp(log_scale);
    for (auto& r : m)
      for (auto& v : r) v *= s;
    return m;
  }
  double determinant() const { return std::exp(log_det); }
  std::array<std::complex<double>, 2> multipliers() const {
    return {std::exp(log_multipliers[0]), std::exp(log_multipliers[1])};
  }
};

inline IntegrationConfig monodromy_config() {
  IntegrationConfig c;
  c.rel_tol = 1e-13;
  c.abs_tol = 1e-13;
  return c;
}

// Continuous QR: Phi = Q(theta) R with R = [[r11, r12], [0, r22]] tracked as
// (theta, log r11, log r22, r12 / r11). Everything stays O(1) or grows
// linearly, and log det = log r11 + log r22 comes out of its own quadrature.
inline Monodromy monodromy(const MathieuSystem& s, const IntegrationConfig& cfg = monodromy_config()) {
  cfg.validate();
  auto rhs = [&s](double tau, const std::array<double, 4>& y) {
    const double q = s.q(tau);
    const double c = std::cos(y[0]), sn = std::sin(y[0]);
    const double b11 = c * sn * (1.0 - q);
    const double b12 = c * c + q * sn * sn;
    const double b21 = -sn * sn - q * c * c;
    const double b22 = c * sn * (q - 1.0);
    return std::array<double, 4>{b21, b11, b22, (b12 + b21) * std::exp(y[2] - y[1])};
  };
  std::array<double, 4> end{};
  integrate_dp5<4>(rhs, 0.0, std::array<double, 4>{0.0, 0.0, 0.0, 0.0}, pi, cfg,
                   [&](double, double, const auto&, const std::array<double, 4>& y) {
                     end = y;
                     return true;
                   });
  const double th = end[0], l1 = end[1], l2 = end[2], w = end[3];
  const double c = std::cos(th), sn = std::sin(th);
  const double rr = std::exp(l2 - l1);
  Monodromy m;
  m.log_scale = l1;
  m.scaled = {{{c, c * w - sn * rr}, {sn, sn * w + c * rr}}};
  m.log_det = l1 + l2;

  // eigenvalues of exp(L) * S with det known as a log
  using cd = std::complex<double>;
  const double tr = m.scaled[0][0] + m.scaled[1][1];
  const double det_scaled = std::exp(m.log_det - 2.0 * l1);
  const cd disc = std::sqrt(cd(tr * tr / 4.0 - det_scaled, 0.0));
  const cd half(tr / 2.0, 0.0);
  cd big = std::abs(half + disc) >= std::abs(half - disc) ? half + disc : half - disc;
  if (std::abs(big) == 0.0) big = disc;
  const cd log_big = std::log(big) + l1;
  m.log_multipliers = {log_big, cd(m.log_det, 0.0) - log_big};
  return m;
}

// Plain integration of the two basis columns; only meaningful while the
// entries stay moderate. Used to cross-check the factored form.
inline std::array<std::array<double, 2>, 2> monodromy_direct(
    const MathieuSystem& s, const IntegrationConfig& cfg = monodromy_config()) {
  auto rhs = [&s](double tau, const std::array<double, 2>& y) {
    return std::array<double, 2>{y[1], -s.q(tau) * y[0]};
  };
  std::array<std::array<double, 2>, 2> m{};
  for (int col = 0; col < 2; ++col) {
    std::array<double, 2> end{};
    integrate_dp5<2>(rhs, 0.0, std::array<double, 2>{col == 0 ? 1.0 : 0.0, col == 0 ? 0.0 : 1.0}, pi,
                     cfg, [&](double, double, const auto&, const std::array<double, 2>& y) {
                       end = y;
                       return true;
                     });
    m[0][static_cast<std::size_t>(col)] = end[0];
    m[1][static_cast<std::size_t>(col)] = end[1];
  }
  return m;
}

}  // namespace drslip
