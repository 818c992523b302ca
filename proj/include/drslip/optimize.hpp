#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"

namespace drslip {

using Vector = std::vector<double>;

// One evaluation of the problem at a point: cost, equality residuals
// (want 0) and inequality slacks (want >= 0).
struct Evaluation {
  double cost = 0.0;
  Vector eq;
  Vector ineq;
};

using ProblemFn = std::function<Evaluation(const Vector&)>;

inline ProblemFn make_problem(std::function<double(const Vector&)> cost,
                              std::function<Vector(const Vector&)> eq = {},
                              std::function<Vector(const Vector&)> ineq = {}) {
  return [=](const Vector& x) {
    Evaluation e;
    e.cost = cost ? cost(x) : 0.0;
    if (eq) e.eq = eq(x);
    if (ineq) e.ineq = ineq(x);
    return e;
  };
}

struct MinimizeOptions {
  double constraint_tol = 1e-6;
  double optimality_tol = 1e-6;
  int max_outer = 60;
  int max_inner = 400;
  double fd_step = 1e-7;
  bool central_differences = true;
  double initial_penalty = 10.0;
  double max_penalty = 1e10;
};

enum class MinimizeStatus { converged, iteration_cap };

struct MinimizeResult {
  Vector x;
  MinimizeStatus status = MinimizeStatus::iteration_cap;
  double cost = 0.0;
  double max_violation = 0.0;
  double optimality = 0.0;  // inf-norm of the Lagrangian gradient
  Vector eq_multipliers;
  Vector ineq_multipliers;
  int outer_iterations = 0;
  long evaluations = 0;
};

namespace detail {

inline void check_finite(const Evaluation& e) {
  bool ok = std::isfinite(e.cost);
  for (double v : e.eq) ok = ok && std::isfinite(v);
  for (double v : e.ineq) ok = ok && std::isfinite(v);
  if (!ok) fail(ErrorKind::nonfinite, "objective or constraints returned a nonfinite value");
}

struct Linearization {
  Evaluation at;
  Vector grad_cost;
  std::vector<Vector> jac_eq;    // [row][var]
  std::vector<Vector> jac_ineq;
};

inline double inf_norm(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

// Augmented Lagrangian with a BFGS inner loop. Derivatives come from finite
// differences of the problem function and are composed into the Lagrangian
// gradient, so each gradient costs n (or 2n) problem evaluations.
inline MinimizeResult minimize(const ProblemFn& problem, Vector x, const MinimizeOptions& opt = {}) {
  const std::size_t n = x.size();
  MinimizeResult res;
  long evals = 0;
  auto eval = [&](const Vector& p) {
    ++evals;
    Evaluation e = problem(p);
    detail::check_finite(e);
    return e;
  };

  auto linearize = [&](const Vector& p, const Evaluation& at) {
    detail::Linearization lin;
    lin.at = at;
    lin.grad_cost.assign(n, 0.0);
    lin.jac_eq.assign(at.eq.size(), Vector(n, 0.0));
    lin.jac_ineq.assign(at.ineq.size(), Vector(n, 0.0));
    Vector q = p;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::abs(p[j]));
      q[j] = p[j] + h;
      const Evaluation up = eval(q);
      Evaluation dn;
      double span = h;
      if (opt.central_differences) {
        q[j] = p[j] - h;
        dn = eval(q);
        span = 2.0 * h;
      } else {
        dn = at;
      }
      q[j] = p[j];
      lin.grad_cost[j] = (up.cost - dn.cost) / span;
      for (std::size_t i = 0; i < at.eq.size(); ++i) lin.jac_eq[i][j] = (up.eq[i] - dn.eq[i]) / span;
      for (std::size_t i = 0; i < at.ineq.size(); ++i)
        lin.jac_ineq[i][j] = (up.ineq[i] - dn.ineq[i]) / span;
    }
    return lin;
  };

  Evaluation cur = eval(x);
  Vector lam(cur.eq.size(), 0.0), nu(cur.ineq.size(), 0.0);
  double rho = opt.initial_penalty;

  auto al_value = [&](const Evaluation& e) {
    double v = e.cost;
    for (std::size_t i = 0; i < e.eq.size(); ++i) v += lam[i] * e.eq[i] + 0.5 * rho * e.eq[i] * e.eq[i];
    for (std::size_t i = 0; i < e.ineq.size(); ++i) {
      const double t = std::max(0.0, nu[i] - rho * e.ineq[i]);
      v += (t * t - nu[i] * nu[i]) / (2.0 * rho);
    }
    return v;
  };
  // gradient of the augmented Lagrangian (al = true) or of the plain
  // Lagrangian with the current multiplier estimates
  auto gradient = [&](const detail::Linearization& lin, bool al) {
    Vector g = lin.grad_cost;
    for (std::size_t i = 0; i < lin.at.eq.size(); ++i) {
      const double w = al ? lam[i] + rho * lin.at.eq[i] : lam[i];
      for (std::size_t j = 0; j < n; ++j) g[j] += w * lin.jac_eq[i][j];
    }
    for (std::size_t i = 0; i < lin.at.ineq.size(); ++i) {
      const double w = al ? std::max(0.0, nu[i] - rho * lin.at.ineq[i]) : nu[i];
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) g[j] -= w * lin.jac_ineq[i][j];
    }
    return g;
  };
  auto violation = [](const Evaluation& e) {
    double v = detail::inf_norm(e.eq);
    for (double s : e.ineq) v = std::max(v, -s);
    return v;
  };

  double prev_violation = violation(cur);
  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    res.outer_iterations = outer;
    // inner BFGS on the augmented Lagrangian
    std::vector<Vector> H(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) H[i][i] = 1.0;
    bool scaled = false;
    auto lin = linearize(x, cur);
    Vector g = gradient(lin, true);
    double f = al_value(cur);
    const double inner_tol = 0.1 * opt.optimality_tol;
    for (int it = 0; it < opt.max_inner && detail::inf_norm(g) > inner_tol; ++it) {
      Vector d(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i] -= H[i][j] * g[j];
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += d[i] * g[i];
      if (!(slope < 0.0)) {
        for (std::size_t i = 0; i < n; ++i) {
          std::fill(H[i].begin(), H[i].end(), 0.0);
          H[i][i] = 1.0;
          d[i] = -g[i];
        }
        slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += d[i] * g[i];
      }
      double step = 1.0;
      Vector xn(n);
      Evaluation en;
      double fn = 0.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * d[i];
        en = eval(xn);
        fn = al_value(en);
        if (fn <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      auto lin_n = linearize(xn, en);
      Vector gn = gradient(lin_n, true);
      Vector s(n), y(n);
      double sy = 0.0, yy = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = xn[i] - x[i];
        y[i] = gn[i] - g[i];
        sy += s[i] * y[i];
        yy += y[i] * y[i];
        ss += s[i] * s[i];
      }
      if (sy > 1e-12 * std::sqrt(ss * yy)) {
        if (!scaled) {
          for (std::size_t i = 0; i < n; ++i) H[i][i] = sy / yy;
          scaled = true;
        }
        Vector Hy(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i][j] * y[j];
        double yHy = 0.0;
        for (std::size_t i = 0; i < n; ++i) yHy += y[i] * Hy[i];
        const double r = 1.0 / sy;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            H[i][j] += (1.0 + yHy * r) * r * s[i] * s[j] - r * (Hy[i] * s[j] + s[i] * Hy[j]);
      }
      x = std::move(xn);
      cur = std::move(en);
      lin = std::move(lin_n);
      g = std::move(gn);
      f = fn;
    }

    // multiplier update
    for (std::size_t i = 0; i < lam.size(); ++i) lam[i] += rho * cur.eq[i];
    for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = std::max(0.0, nu[i] - rho * cur.ineq[i]);
    const double viol = violation(cur);
    const double optimality = detail::inf_norm(gradient(lin, false));
    res.max_violation = viol;
    res.optimality = optimality;
    if (viol < opt.constraint_tol && optimality < opt.optimality_tol) {
      res.status = MinimizeStatus::converged;
      break;
    }
    if (viol > 0.25 * prev_violation) rho = std::min(rho * 10.0, opt.max_penalty);
    prev_violation = viol;
  }
  res.x = x;
  res.cost = cur.cost;
  res.eq_multipliers = lam;
  res.ineq_multipliers = nu;
  res.evaluations = evals;
  return res;
}

}  // namespace drslip
