#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "com_planner.hpp"
#include "mathieu.hpp"
#include "ode.hpp"

namespace drslip {

struct TimingStats {
  double mean_ms = 0.0;
  double sd_ms = 0.0;
  int trials = 0;
};

inline TimingStats timing_stats(const std::vector<double>& ms) {
  TimingStats s;
  s.trials = static_cast<int>(ms.size());
  if (ms.empty()) return s;
  for (double v : ms) s.mean_ms += v;
  s.mean_ms /= static_cast<double>(ms.size());
  if (ms.size() > 1) {
    double acc = 0.0;
    for (double v : ms) acc += (v - s.mean_ms) * (v - s.mean_ms);
    s.sd_ms = std::sqrt(acc / static_cast<double>(ms.size() - 1));
  }
  return s;
}

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct BenchSettings {
  int trials = 100;
  int planner_trials = 0;  // 0: same as trials
  double horizon_s = 0.5;
  int terms = 10;
  std::uint64_t seed = 1;
  IntegrationConfig integration{};
};

struct BenchReport {
  TimingStats analytic;      // per trial: fit + series evaluation on the output grid
  TimingStats tabulated;     // per trial: fit + superposition of a precomputed basis table
  TimingStats oracle;        // per trial: adaptive integration with dense output
  TimingStats plan_analytic;
  TimingStats plan_oracle;
  double table_setup_ms = 0.0;  // one-off cost of the basis table
  double checksum = 0.0;        // keeps the work observable

  double trajectory_speedup() const { return oracle.mean_ms / analytic.mean_ms; }
  double tabulated_speedup() const { return oracle.mean_ms / tabulated.mean_ms; }
  double planner_speedup() const { return plan_oracle.mean_ms / plan_analytic.mean_ms; }
};

// Trajectory timings over random ICs in the |x0|, |v0| < 0.2 box on a fixed
// output grid, then planner timings with both trajectory models.
inline BenchReport run_bench(const ModelParams& p, const SurfaceMotion& m, const GaitSpec* gait,
                             const BenchSettings& cfg) {
  BenchReport r;
  const MathieuSystem s = to_mathieu(p, m);
  const AnalyticSolution base = make_solution(s, cfg.terms);
  const PendulumOde ode = PendulumOde::from(p, m);
  const double dt = cfg.integration.output_step_s;
  const auto count = static_cast<std::size_t>(std::floor(cfg.horizon_s / dt * (1.0 + 1e-12))) + 1;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<std::pair<double, double>> ics;
  for (int i = 0; i < cfg.trials; ++i) {
    const double x0 = u(rng);
    const double v0 = u(rng);
    ics.emplace_back(x0, v0);
  }

  std::vector<double> xs(count), vs(count);
  std::vector<double> ta, tt, to;
  for (const auto& [x0, v0] : ics) {
    ta.push_back(time_ms([&] {
      const AnalyticSolution sol = fitted(base, x0, v0);
      evaluate_grid(sol, 0.0, dt, count, xs.data(), vs.data());
    }));
    r.checksum += xs.back();
  }
  // basis on the grid, built once: x(t_j) = M_j (x0, v0)
  std::vector<double> m00(count), m01(count), m10(count), m11(count);
  r.table_setup_ms = time_ms([&] {
    const auto e1 = evaluate_grid(fitted(base, 1.0, 0.0), 0.0, dt, count);
    const auto e2 = evaluate_grid(fitted(base, 0.0, 1.0), 0.0, dt, count);
    for (std::size_t j = 0; j < count; ++j) {
      m00[j] = e1.x[j];
      m10[j] = e1.v[j];
      m01[j] = e2.x[j];
      m11[j] = e2.v[j];
    }
  });
  for (const auto& [x0, v0] : ics) {
    tt.push_back(time_ms([&] {
      for (std::size_t j = 0; j < count; ++j) {
        xs[j] = m00[j] * x0 + m01[j] * v0;
        vs[j] = m10[j] * x0 + m11[j] * v0;
      }
    }));
    r.checksum += xs.back();
  }
  for (const auto& [x0, v0] : ics) {
    TrajectorySamples out;
    to.push_back(time_ms([&] { out = integrate(ode, x0, v0, cfg.horizon_s, cfg.integration); }));
    r.checksum += out.positions.back();
  }
  r.analytic = timing_stats(ta);
  r.tabulated = timing_stats(tt);
  r.oracle = timing_stats(to);

  if (gait) {
    const int pt = cfg.planner_trials > 0 ? cfg.planner_trials : cfg.trials;
    std::vector<double> pa, po;
    PlannerOptions opt;
    opt.order_N = cfg.terms;
    opt.check_refinement = false;
    for (int i = 0; i < pt; ++i) {
      opt.model = ModelKind::analytic;
      pa.push_back(time_ms([&] { r.checksum += solve(*gait, m, p, opt).alpha[0]; }));
      opt.model = ModelKind::oracle;
      po.push_back(time_ms([&] { r.checksum += solve(*gait, m, p, opt).alpha[0]; }));
    }
    r.plan_analytic = timing_stats(pa);
    r.plan_oracle = timing_stats(po);
  }
  return r;
}

}  // namespace drslip
