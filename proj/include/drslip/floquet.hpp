#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "mathieu.hpp"
#include "ode.hpp"
#include "pendulum.hpp"

namespace drslip {

struct StabilityReport {
  cplx mu1{0.0}, mu2{0.0};  // Re(mu1) <= Re(mu2)
  std::array<cplx, 2> multipliers{};
  std::array<cplx, 2> log_multipliers{};
  bool bounded = false;
  bool marginal = false;  // repeated unit-circle multiplier with a Jordan block
  double max_growth_rate = 0.0;  // Re(mu2) per second
  double consistency_error = 0.0;
};

inline constexpr double unit_circle_tolerance = 1e-8;
inline constexpr double repeated_gap_tolerance = 1e-6;
inline constexpr double consistency_tolerance = 1e-4;

namespace detail {

// |exp(l - m) - 1|: relative distance between exp(l) and exp(m), immune to
// overflow and to the 2 pi i ambiguity of logs
inline double log_rel_diff(cplx l, cplx m) { return std::abs(std::exp(l - m) - 1.0); }

}  // namespace detail

inline StabilityReport classify(const MathieuSystem& s,
                                const IntegrationConfig& cfg = monodromy_config()) {
  StabilityReport r;
  const cplx mu = characteristic_exponent(s);
  r.mu2 = mu;
  r.mu1 = -mu;
  const Monodromy m = monodromy(s, cfg);
  r.log_multipliers = m.log_multipliers;
  r.multipliers = m.multipliers();

  const cplx lp = mu * pi, lm = -mu * pi;
  const double direct = std::max(detail::log_rel_diff(m.log_multipliers[0], lp),
                                 detail::log_rel_diff(m.log_multipliers[1], lm));
  const double swapped = std::max(detail::log_rel_diff(m.log_multipliers[0], lm),
                                  detail::log_rel_diff(m.log_multipliers[1], lp));
  r.consistency_error = std::min(direct, swapped);
  if (!(r.consistency_error <= consistency_tolerance))
    fail(ErrorKind::consistency, "analytic exponent and monodromy multipliers disagree (" +
                                     std::to_string(r.consistency_error) + ")");

  const double mag0 = std::exp(m.log_multipliers[0].real());
  const double mag1 = std::exp(m.log_multipliers[1].real());
  const bool inside = mag0 <= 1.0 + unit_circle_tolerance && mag1 <= 1.0 + unit_circle_tolerance;
  if (inside) {
    const double gap = std::abs(r.multipliers[0] - r.multipliers[1]);
    if (gap < repeated_gap_tolerance) {
      // repeated multiplier: bounded only when M is a multiple of the identity
      const auto mm = m.matrix();
      const double lam = (mm[0][0] + mm[1][1]) / 2.0;
      const double off = std::max({std::abs(mm[0][0] - lam), std::abs(mm[1][1] - lam),
                                   std::abs(mm[0][1]), std::abs(mm[1][0])});
      r.bounded = off < repeated_gap_tolerance;
      r.marginal = !r.bounded;
    } else {
      r.bounded = true;
    }
  }
  r.max_growth_rate = r.mu2.real() * s.omega_rad_s / 2.0;
  return r;
}

// Grid axis: `count` points on [lo, hi]; with open_lower the points are
// lo + (hi - lo) k / count for k = 1..count, otherwise linspace(lo, hi, count).
struct GridRange {
  double lo = 0.0;
  double hi = 1.0;
  int count = 1;
  bool open_lower = false;

  std::vector<double> points() const {
    if (count < 1) fail(ErrorKind::validation, "grid size must be >= 1");
    if (!(std::isfinite(lo) && std::isfinite(hi)) || hi < lo)
      fail(ErrorKind::validation, "grid range must satisfy lo <= hi");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
      if (open_lower)
        out.push_back(lo + (hi - lo) * (k + 1) / count);
      else
        out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
    }
    return out;
  }
};

struct StabilityMapRequest {
  GridRange amplitude_m{0.0, 1.0, 10, true};
  GridRange omega_rad_s{0.0, 2.0 * pi, 10, true};
  GridRange com_height_m{0.3, 0.55, 6, false};
  double gravity_m_s2 = 9.81;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct StabilityMapRow {
  double amplitude_m = 0.0;
  double omega_rad_s = 0.0;
  double com_height_m = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double re_mu2 = 0.0;
  bool bounded = false;
  std::string error;  // empty when the cell evaluated cleanly
};

inline StabilityMapRow evaluate_cell(double a, double w, double z0, double g) {
  StabilityMapRow row;
  row.amplitude_m = a;
  row.omega_rad_s = w;
  row.com_height_m = z0;
  try {
    ModelParams p;
    p.com_height_m = z0;
    p.gravity_m_s2 = g;
    const MathieuSystem s = to_mathieu(p, SurfaceMotion{a, w});
    row.c0 = s.c0;
    row.c1 = s.c1;
    const StabilityReport rep = classify(s);
    row.re_mu2 = rep.mu2.real();
    row.bounded = rep.bounded;
  } catch (const Error& e) {
    row.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return row;
}

// Rows sorted by (z0, omega, A). Cells are independent and spread over
// worker threads; each writes only its own slot.
inline std::vector<StabilityMapRow> stability_map(const StabilityMapRequest& req) {
  if (!(req.gravity_m_s2 > 0.0)) fail(ErrorKind::validation, "gravity must be > 0");
  const auto as = req.amplitude_m.points();
  const auto ws = req.omega_rad_s.points();
  const auto zs = req.com_height_m.points();
  for (double w : ws)
    if (!(w > 0.0)) fail(ErrorKind::validation, "frequencies must be > 0");
  for (double z : zs)
    if (!(z > 0.0)) fail(ErrorKind::validation, "com heights must be > 0");
  for (double a : as)
    if (!(a >= 0.0)) fail(ErrorKind::validation, "amplitudes must be >= 0");

  std::vector<std::tuple<double, double, double>> cells;
  for (double z : zs)
    for (double w : ws)
      for (double a : as) cells.emplace_back(z, w, a);
  std::sort(cells.begin(), cells.end());
  std::vector<StabilityMapRow> rows(cells.size());

  unsigned nt = req.threads ? req.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = std::min<unsigned>(nt, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < cells.size(); i += nt) {
        const auto [z, w, a] = cells[i];
        rows[i] = evaluate_cell(a, w, z, req.gravity_m_s2);
      }
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace drslip
