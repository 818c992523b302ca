#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "error.hpp"
#include "pendulum.hpp"

namespace drslip {

using cplx = std::complex<double>;

inline constexpr double pole_tolerance = 1e-12;

inline cplx beta(int n, cplx mu, const MathieuSystem& s) {
  const cplx k = cplx(2.0 * n, 0.0) - cplx(0.0, 1.0) * mu;
  const cplx den = k * k - s.c0;
  if (std::abs(den) < pole_tolerance)
    fail(ErrorKind::pole, "beta_" + std::to_string(n) + " denominator vanishes");
  return s.c1 / den;
}

namespace detail {

// beta_n(0), real for every real system
inline double beta0(int n, const MathieuSystem& s) {
  const double den = 4.0 * n * n - s.c0;
  if (std::abs(den) < pole_tolerance)
    fail(ErrorKind::pole, "beta_" + std::to_string(n) + "(0) denominator vanishes");
  return s.c1 / den;
}

// log of prod_{k >= from} (1 - beta_k beta_{k+1}) at mu = 0. Summed
// explicitly for a few thousand terms, then the remainder c1^2/(16 k^4)
// is integrated with a midpoint rule.
inline double hill_tail_log(const MathieuSystem& s, int from) {
  constexpr int explicit_terms = 4096;
  double acc = 0.0;
  double b_prev = beta0(from, s);
  const int last = from + explicit_terms;
  for (int k = from; k < last; ++k) {
    const double b_next = beta0(k + 1, s);
    acc += std::log1p(-b_prev * b_next);
    b_prev = b_next;
  }
  const double edge = last - 0.5;
  acc -= s.c1 * s.c1 / (48.0 * edge * edge * edge);
  return acc;
}

}  // namespace detail

// Determinant of the (2M+1)-square Hill matrix at mu = 0, via the continuant
// recurrence. With tail_correction the rows beyond +-M are accounted for by
// an asymptotic product so that M = 15 already agrees with much wider
// truncations to ~1e-14.
inline double hill_determinant(const MathieuSystem& s, int half_width_M = 15,
                               bool tail_correction = true) {
  if (half_width_M < 1) fail(ErrorKind::validation, "half width must be >= 1");
  if (s.c1 == 0.0) return 1.0;
  double d_prev2 = 1.0;  // D_{k-2}
  double d_prev = 1.0;   // D_{k-1}
  double b_prev = 0.0;
  for (int n = -half_width_M; n <= half_width_M; ++n) {
    const double b = detail::beta0(n, s);
    const double d = d_prev - b_prev * b * d_prev2;
    d_prev2 = d_prev;
    d_prev = d;
    b_prev = b;
  }
  if (!tail_correction) return d_prev;
  // symmetric matrix at mu = 0: the same factor applies above and below
  return d_prev * std::exp(2.0 * detail::hill_tail_log(s, half_width_M));
}

// Closed-form exponent from the Hill determinant, principal branch.
inline cplx hill_exponent(const MathieuSystem& s, int half_width_M = 15) {
  const double delta = hill_determinant(s, half_width_M);
  if (s.c0 < 0.0) {
    const double a = pi * std::sqrt(-s.c0) / 2.0;
    if (a > 20.0 && std::abs(delta) > 1e-300) {
      // acosh(X) = log(2|X|) (+ i pi for X < 0), with 2X ~ delta e^{2a}
      const double re = 2.0 * a + std::log(std::abs(delta)) +
                        std::log1p(2.0 * (1.0 - delta) * std::exp(-2.0 * a) / delta);
      return cplx(re, delta < 0.0 ? pi : 0.0) / pi;
    }
    const double sh = std::sinh(a);
    const double x = 1.0 + 2.0 * delta * sh * sh;
    return std::acosh(cplx(x, 0.0)) / pi;
  }
  const double sn = std::sin(pi * std::sqrt(s.c0) / 2.0);
  const double x = 1.0 - 2.0 * delta * sn * sn;
  cplx mu = std::acosh(cplx(x, 0.0)) / pi;
  if (mu.real() < 0.0) mu = -mu;
  return mu;
}

// C_2n for n = -N..N, normalized with C_0 = 1.
struct SeriesCoefficients {
  int order_N = 0;
  std::vector<cplx> coeffs{cplx(1.0)};

  cplx operator()(int n) const {
    if (n < -order_N || n > order_N) return cplx(0.0);
    return coeffs[static_cast<std::size_t>(n + order_N)];
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    return m;
  }
};

namespace detail {

// Ratios C_2n / C_2(n-1) for n = 1..count (sign = +1), or
// C_2n / C_2(n+1) for n = -1..-count (sign = -1), from a fraction started at
// the given depth.
inline std::vector<cplx> fraction_ratios(const MathieuSystem& s, cplx mu, int count,
                                         int depth, int sign) {
  std::vector<cplx> r(static_cast<std::size_t>(count + 1), cplx(0.0));
  cplx next(0.0);
  for (int k = depth; k >= 1; --k) {
    const cplx b = beta(sign * k, mu, s);
    const cplx den = 1.0 + b * next;
    if (std::abs(den) < pole_tolerance)
      fail(ErrorKind::pole, "continued fraction hits a pole");
    next = -b / den;
    if (k <= count) r[static_cast<std::size_t>(k)] = next;
  }
  return r;
}

inline std::vector<cplx> converged_ratios(const MathieuSystem& s, cplx mu, int count,
                                          int sign) {
  constexpr int max_depth = 5000;
  const int want = std::max(count, 1);
  int depth = std::max(count + 10, 40);
  auto r = fraction_ratios(s, mu, want, depth, sign);
  while (true) {
    auto deeper = fraction_ratios(s, mu, want, depth + 5, sign);
    const double ref = std::max(std::abs(deeper[1]), 1e-300);
    if (std::abs(deeper[1] - r[1]) <= 1e-13 * ref || (deeper[1] == r[1])) return deeper;
    depth += 5;
    r = std::move(deeper);
    if (depth > max_depth)
      fail(ErrorKind::nonconvergence, "continued fraction did not stabilize");
  }
}

}  // namespace detail


namespace detail {

// Defect of the n = 0 row once the fractions have fixed C_2 and C_-2.
inline cplx central_defect(const MathieuSystem& s, cplx mu) {
  const auto up = converged_ratios(s, mu, 1, +1);
  const auto down = converged_ratios(s, mu, 1, -1);
  return -mu * mu - s.c0 + s.c1 * (up[1] + down[1]);
}

}  // namespace detail

// Principal characteristic exponent (Re >= 0); the other one is its negative.
// The Hill closed form is accurate to ~1e-14; a few secant steps on the
// central recurrence row bring it to roundoff, which the series needs for
// its n = 0 row to hold. Falls back to the closed form if that stalls.
inline cplx characteristic_exponent(const MathieuSystem& s, int half_width_M = 15,
                                    bool polish = true) {
  const cplx mu0 = hill_exponent(s, half_width_M);
  if (!polish || s.c1 == 0.0) return mu0;
  try {
    const double scale = std::max(std::abs(mu0), 1.0);
    cplx a = mu0, b = mu0 + 1e-7 * scale;
    cplx fa = detail::central_defect(s, a), fb = detail::central_defect(s, b);
    const double f0 = std::abs(fa);
    for (int it = 0; it < 8 && fb != fa; ++it) {
      const cplx c = b - fb * (b - a) / (fb - fa);
      a = b;
      fa = fb;
      b = c;
      fb = detail::central_defect(s, b);
      if (std::abs(b - a) <= 1e-16 * scale) break;
    }
    if (std::abs(fb) <= f0 && std::abs(b - mu0) < 1e-8 * scale) {
      if (b.real() < 0.0) b = -b;
      return b;
    }
  } catch (const Error&) {
  }
  return mu0;
}

inline SeriesCoefficients series_coefficients(const MathieuSystem& s, cplx mu, int order_N) {
  if (order_N < 0) fail(ErrorKind::validation, "order must be >= 0");
  SeriesCoefficients out;
  out.order_N = order_N;
  out.coeffs.assign(static_cast<std::size_t>(2 * order_N + 1), cplx(0.0));
  out.coeffs[static_cast<std::size_t>(order_N)] = cplx(1.0);
  if (order_N == 0) return out;
  const auto up = detail::converged_ratios(s, mu, order_N, +1);
  const auto down = detail::converged_ratios(s, mu, order_N, -1);
  cplx cu(1.0), cd(1.0);
  for (int n = 1; n <= order_N; ++n) {
    cu *= up[static_cast<std::size_t>(n)];
    cd *= down[static_cast<std::size_t>(n)];
    out.coeffs[static_cast<std::size_t>(order_N + n)] = cu;
    out.coeffs[static_cast<std::size_t>(order_N - n)] = cd;
  }
  return out;
}

// beta-form residual of the recurrence at index n, coefficients beyond +-N
// taken as zero.
inline cplx recurrence_residual(const MathieuSystem& s, cplx mu,
                                const SeriesCoefficients& c, int n) {
  const cplx b = beta(n, mu, s);
  return b * c(n - 1) + c(n) + b * c(n + 1);
}

// The same equation multiplied through by the beta denominator. Well
// conditioned even where beta is large (n = 0 sits close to a pole).
inline cplx cleared_residual(const MathieuSystem& s, cplx mu, const SeriesCoefficients& c,
                             int n) {
  const cplx k = cplx(2.0 * n, 0.0) - cplx(0.0, 1.0) * mu;
  return (k * k - s.c0) * c(n) + s.c1 * (c(n - 1) + c(n + 1));
}

struct Basis {
  cplx x1, x2;       // the two Floquet solutions
  cplx dx1, dx2;     // their tau-derivatives
};

struct PhaseState {
  double x;
  double v;
};

struct TrajectoryGrid {
  std::vector<double> x;
  std::vector<double> v;
};

class AnalyticSolution {
 public:
  AnalyticSolution() = default;
  AnalyticSolution(const MathieuSystem& s, cplx mu, SeriesCoefficients c)
      : system_(s), mu_(mu), coefficients_(std::move(c)) {
    const int N = coefficients_.order_N;
    rates_.resize(coefficients_.coeffs.size());
    for (int n = -N; n <= N; ++n)
      rates_[static_cast<std::size_t>(n + N)] = (mu_ + cplx(0.0, 2.0 * n)) * coefficients_(n);
  }

  const MathieuSystem& system() const { return system_; }
  cplx mu() const { return mu_; }
  const SeriesCoefficients& coefficients() const { return coefficients_; }
  cplx alpha1() const { return alpha1_; }
  cplx alpha2() const { return alpha2_; }
  void set_alphas(cplx a1, cplx a2) {
    alpha1_ = a1;
    alpha2_ = a2;
  }

  Basis basis_tau(double tau) const {
    const int N = coefficients_.order_N;
    const cplx z = std::polar(1.0, 2.0 * tau);
    cplx s1 = coefficients_(0), s2 = s1;
    cplx t1 = rates_[static_cast<std::size_t>(N)], t2 = t1;
    cplx zp(1.0);
    for (int n = 1; n <= N; ++n) {
      zp *= z;
      const cplx zm = std::conj(zp);
      const auto ip = static_cast<std::size_t>(N + n);
      const auto im = static_cast<std::size_t>(N - n);
      const cplx& cp = coefficients_.coeffs[ip];
      const cplx& cm = coefficients_.coeffs[im];
      s1 += cp * zp + cm * zm;
      s2 += cp * zm + cm * zp;
      t1 += rates_[ip] * zp + rates_[im] * zm;
      t2 += rates_[ip] * zm + rates_[im] * zp;
    }
    const cplx e = std::exp(mu_ * tau);
    const cplx ei = 1.0 / e;
    return {e * s1, ei * s2, e * t1, -ei * t2};
  }

  Basis basis(double t) const { return basis_tau(system_.to_tau(t)); }

  // complex position and velocity; the imaginary parts are roundoff
  std::pair<cplx, cplx> evaluate_complex(double t) const {
    const Basis b = basis(t);
    const double r = system_.tau_rate();
    return {alpha1_ * b.x1 + alpha2_ * b.x2, (alpha1_ * b.dx1 + alpha2_ * b.dx2) * r};
  }

  PhaseState evaluate(double t) const {
    const auto [x, v] = evaluate_complex(t);
    return {x.real(), v.real()};
  }

  // x'' + q x in tau, from the recurrence defects, which is exact for the
  // truncated series
  double ode_residual_tau(double tau) const {
    const int N = coefficients_.order_N;
    const MathieuSystem& s = system_;
    cplx r1(0.0), r2(0.0);
    for (int n = -N - 1; n <= N + 1; ++n) {
      const cplx k = cplx(2.0 * n, 0.0) - cplx(0.0, 1.0) * mu_;
      const cplx rho = -((k * k - s.c0) * coefficients_(n) +
                         s.c1 * (coefficients_(n - 1) + coefficients_(n + 1)));
      const cplx ph = (mu_ + cplx(0.0, 2.0 * n)) * tau;
      r1 += rho * std::exp(ph);
      r2 += rho * std::exp(-ph);
    }
    return std::abs(alpha1_ * r1 + alpha2_ * r2);
  }

 private:
  MathieuSystem system_{};
  cplx mu_{0.0};
  SeriesCoefficients coefficients_{};
  std::vector<cplx> rates_{cplx(0.0)};
  cplx alpha1_{0.0}, alpha2_{0.0};
};

namespace detail {

// Determinant of [[a, b], [c, d]] with a singularity test. The columns grow
// like exp(+-mu tau); they are equilibrated first so a late start time is
// not mistaken for a singular system.
inline cplx checked_determinant(cplx a, cplx b, cplx c, cplx d) {
  const cplx det = a * d - b * c;
  const double k1 = std::hypot(std::abs(a), std::abs(c));
  const double k2 = std::hypot(std::abs(b), std::abs(d));
  const double n1 = std::hypot(std::abs(a) / k1, std::abs(b) / k2);
  const double n2 = std::hypot(std::abs(c) / k1, std::abs(d) / k2);
  if (!(k1 > 0.0 && k2 > 0.0 && std::abs(det) / (k1 * k2) > 1e-10 * n1 * n2))
    fail(ErrorKind::singular, "initial-condition system is singular");
  return det;
}

}  // namespace detail

// Weights that reproduce (x0, v0) at time t0 (default t = 0, tau = pi/4).
inline std::pair<cplx, cplx> fit_initial_conditions(const AnalyticSolution& sol, double x0,
                                                    double v0, double t0 = 0.0) {
  const Basis b = sol.basis(t0);
  const double r = sol.system().tau_rate();
  const cplx a = b.x1, bb = b.x2, c = b.dx1 * r, d = b.dx2 * r;
  const cplx det = detail::checked_determinant(a, bb, c, d);
  return {(d * x0 - bb * v0) / det, (a * v0 - c * x0) / det};
}

inline std::pair<cplx, cplx> fit_initial_conditions(const MathieuSystem& s, cplx mu,
                                                    const SeriesCoefficients& c, double x0,
                                                    double v0, double t0 = 0.0) {
  return fit_initial_conditions(AnalyticSolution(s, mu, c), x0, v0, t0);
}

// Unfitted solution object for a system: exponent plus N-term coefficients.
inline AnalyticSolution make_solution(const MathieuSystem& s, int order_N, int half_width_M = 15) {
  const cplx mu = characteristic_exponent(s, half_width_M);
  return AnalyticSolution(s, mu, series_coefficients(s, mu, order_N));
}

inline AnalyticSolution fitted(AnalyticSolution sol, double x0, double v0, double t0 = 0.0) {
  const auto [a1, a2] = fit_initial_conditions(sol, x0, v0, t0);
  sol.set_alphas(a1, a2);
  return sol;
}

inline AnalyticSolution solve_analytic(const MathieuSystem& s, int order_N, double x0, double v0,
                                       double t0 = 0.0) {
  return fitted(make_solution(s, order_N), x0, v0, t0);
}

inline PhaseState evaluate(const AnalyticSolution& sol, double t) { return sol.evaluate(t); }

// Real 2x2 map (x, v)(t0) -> (x, v)(t1) built from the basis. Lets a caller
// reuse one solve for any number of initial conditions.
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 transition_matrix(const AnalyticSolution& sol, double t0, double t1) {
  Mat2 m{};
  for (int col = 0; col < 2; ++col) {
    const auto f = fitted(sol, col == 0 ? 1.0 : 0.0, col == 0 ? 0.0 : 1.0, t0);
    const PhaseState p = f.evaluate(t1);
    m[0][static_cast<std::size_t>(col)] = p.x;
    m[1][static_cast<std::size_t>(col)] = p.v;
  }
  return m;
}

// Samples of a fitted solution on the uniform grid t0 + k dt, k < count.
// Phases and exponentials advance by recurrences that are re-anchored every
// 64 samples; the Fourier sums run sample-innermost in split real/imaginary
// arrays so the compiler can vectorize them (std::complex multiplication
// goes through a NaN-checking library call).
inline void evaluate_grid(const AnalyticSolution& sol, double t0, double dt, std::size_t count,
                          double* xs, double* vs) {
  constexpr std::size_t block = 64;
  const MathieuSystem& sys = sol.system();
  const SeriesCoefficients& c = sol.coefficients();
  const int N = c.order_N;
  const double rate = sys.tau_rate();
  const double dtau = rate * dt;
  const cplx mu = sol.mu();
  const cplx a1 = sol.alpha1(), a2 = sol.alpha2();

  alignas(64) double er[block], ei[block], pr[block], pi_[block], zr[block], zi[block];
  alignas(64) double s1r[block], s1i[block], s2r[block], s2i[block];
  alignas(64) double t1r[block], t1i[block], t2r[block], t2i[block];
  for (std::size_t start = 0; start < count; start += block) {
    const std::size_t m = std::min(block, count - start);
    const double tau0 = sys.to_tau(t0 + dt * static_cast<double>(start));
    const cplx e0 = std::exp(mu * tau0), se = std::exp(mu * dtau);
    const cplx z0 = std::polar(1.0, 2.0 * tau0), sz = std::polar(1.0, 2.0 * dtau);
    er[0] = e0.real();
    ei[0] = e0.imag();
    pr[0] = z0.real();
    pi_[0] = z0.imag();
    for (std::size_t j = 1; j < m; ++j) {
      er[j] = er[j - 1] * se.real() - ei[j - 1] * se.imag();
      ei[j] = er[j - 1] * se.imag() + ei[j - 1] * se.real();
      pr[j] = pr[j - 1] * sz.real() - pi_[j - 1] * sz.imag();
      pi_[j] = pr[j - 1] * sz.imag() + pi_[j - 1] * sz.real();
    }
    const cplx c0 = c(0), r0 = mu * c0;
    for (std::size_t j = 0; j < m; ++j) {
      s1r[j] = s2r[j] = c0.real();
      s1i[j] = s2i[j] = c0.imag();
      t1r[j] = t2r[j] = r0.real();
      t1i[j] = t2i[j] = r0.imag();
      zr[j] = 1.0;
      zi[j] = 0.0;
    }
    for (int n = 1; n <= N; ++n) {
      const cplx cp = c(n), cm = c(-n);
      const cplx rp = (mu + cplx(0.0, 2.0 * n)) * cp, rm = (mu - cplx(0.0, 2.0 * n)) * cm;
      // sums of c z^n + d conj(z)^n split into parts multiplying Re z^n and Im z^n
      const double spr = cp.real() + cm.real(), spi = cp.imag() + cm.imag();
      const double smr = cp.real() - cm.real(), smi = cp.imag() - cm.imag();
      const double rpr = rp.real() + rm.real(), rpi = rp.imag() + rm.imag();
      const double rmr = rp.real() - rm.real(), rmi = rp.imag() - rm.imag();
      for (std::size_t j = 0; j < m; ++j) {
        const double nr = zr[j] * pr[j] - zi[j] * pi_[j];
        const double ni = zr[j] * pi_[j] + zi[j] * pr[j];
        zr[j] = nr;
        zi[j] = ni;
        // cp z + cm conj(z) = (cp+cm) Re z + i (cp-cm) Im z
        s1r[j] += spr * nr - smi * ni;
        s1i[j] += spi * nr + smr * ni;
        s2r[j] += spr * nr + smi * ni;
        s2i[j] += spi * nr - smr * ni;
        t1r[j] += rpr * nr - rmi * ni;
        t1i[j] += rpi * nr + rmr * ni;
        t2r[j] += rpr * nr + rmi * ni;
        t2i[j] += rpi * nr - rmr * ni;
      }
    }
    // x = Re(a1 E S1 + a2 S2 / E), v = Re(a1 E T1 - a2 T2 / E) * rate
    for (std::size_t j = 0; j < m; ++j) {
      const double inv = 1.0 / (er[j] * er[j] + ei[j] * ei[j]);
      const double fr = er[j] * inv, fi = -ei[j] * inv;
      const double u1r = a1.real() * er[j] - a1.imag() * ei[j];
      const double u1i = a1.real() * ei[j] + a1.imag() * er[j];
      const double u2r = a2.real() * fr - a2.imag() * fi;
      const double u2i = a2.real() * fi + a2.imag() * fr;
      xs[start + j] = u1r * s1r[j] - u1i * s1i[j] + u2r * s2r[j] - u2i * s2i[j];
      vs[start + j] = (u1r * t1r[j] - u1i * t1i[j] - (u2r * t2r[j] - u2i * t2i[j])) * rate;
    }
  }
}

inline TrajectoryGrid evaluate_grid(const AnalyticSolution& sol, double t0, double dt,
                                    std::size_t count) {
  TrajectoryGrid g;
  g.x.resize(count);
  g.v.resize(count);
  evaluate_grid(sol, t0, dt, count, g.x.data(), g.v.data());
  return g;
}

struct TruncationOptions {
  double horizon_s = 0.0;  // 0: one surface period
  int max_order = 64;
  int probes = 32;
  int samples = 201;
  std::uint64_t seed = 0x5eed;
};

// 32 Latin-hypercube probe ICs over |x0|, |v0| <= 0.2.
inline std::vector<PhaseState> truncation_probes(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> px(static_cast<std::size_t>(count)), pv(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) px[static_cast<std::size_t>(i)] = pv[static_cast<std::size_t>(i)] = i;
  std::shuffle(px.begin(), px.end(), rng);
  std::shuffle(pv.begin(), pv.end(), rng);
  std::vector<PhaseState> out;
  for (int i = 0; i < count; ++i) {
    const double fx = (px[static_cast<std::size_t>(i)] + u(rng)) / count;
    const double fv = (pv[static_cast<std::size_t>(i)] + u(rng)) / count;
    out.push_back({-0.2 + 0.4 * fx, -0.2 + 0.4 * fv});
  }
  return out;
}

inline int choose_truncation(const MathieuSystem& s, double tolerance,
                             const TruncationOptions& opt = {}) {
  if (!(tolerance > 0.0)) fail(ErrorKind::validation, "tolerance must be > 0");
  const cplx mu = characteristic_exponent(s);
  const double horizon = opt.horizon_s > 0.0 ? opt.horizon_s : 2.0 * pi / s.omega_rad_s;
  const auto probes = truncation_probes(opt.probes, opt.seed);

  auto sample = [&](int order) {
    AnalyticSolution base(s, mu, series_coefficients(s, mu, order));
    std::vector<std::vector<double>> xs;
    for (const auto& p : probes) {
      const auto sol = fitted(base, p.x, p.v);
      std::vector<double> row(static_cast<std::size_t>(opt.samples));
      for (int j = 0; j < opt.samples; ++j)
        row[static_cast<std::size_t>(j)] = sol.evaluate(horizon * j / (opt.samples - 1)).x;
      xs.push_back(std::move(row));
    }
    return xs;
  };

  for (int n = 0; n <= opt.max_order; ++n) {
    const auto a = sample(n);
    const auto b = sample(n + 5);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double peak = 0.0, dev = 0.0;
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        peak = std::max(peak, std::abs(b[i][j]));
        dev = std::max(dev, std::abs(a[i][j] - b[i][j]));
      }
      if (peak > 0.0) worst = std::max(worst, dev / peak);
    }
    if (worst < tolerance) return n;
  }
  fail(ErrorKind::cap, "truncation order exceeds the configured maximum");
}

}  // namespace drslip
