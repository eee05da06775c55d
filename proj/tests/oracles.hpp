#pragma once

// Independent reference implementations used only by the test suite. Every
// routine here deliberately takes a different algorithmic route than the
// library (recursive Simpson instead of Gauss-Kronrod, direct series instead
// of continued fractions, std::mt19937_64 instead of the library generator)
// so agreement is evidence rather than tautology.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// Recursive adaptive Simpson quadrature (Lyness criterion).
namespace detail {
inline long double simpson_rule(long double lo, long double hi, long double flo,
                                long double fmid, long double fhi) {
  return (hi - lo) / 6.0L * (flo + 4.0L * fmid + fhi);
}

inline long double simpson_rec(const std::function<long double(long double)>& f,
                               long double lo, long double hi,
                               long double flo, long double fmid, long double fhi,
                               long double whole, long double tol, int depth) {
  const long double mid = 0.5L * (lo + hi);
  const long double lmid = 0.5L * (lo + mid);
  const long double rmid = 0.5L * (mid + hi);
  const long double flm = f(lmid);
  const long double frm = f(rmid);
  const long double left = simpson_rule(lo, mid, flo, flm, fmid);
  const long double right = simpson_rule(mid, hi, fmid, frm, fhi);
  const long double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0L * tol) {
    return left + right + delta / 15.0L;
  }
  return simpson_rec(f, lo, mid, flo, flm, fmid, left, 0.5L * tol, depth - 1) +
         simpson_rec(f, mid, hi, fmid, frm, fhi, right, 0.5L * tol, depth - 1);
}
}  // namespace detail

inline long double simpson_adaptive(const std::function<long double(long double)>& f,
                                    long double lo, long double hi,
                                    long double tol = 1e-13L) {
  if (!(hi > lo)) return 0.0L;
  const long double mid = 0.5L * (lo + hi);
  const long double flo = f(lo);
  const long double fmid = f(mid);
  const long double fhi = f(hi);
  const long double whole = detail::simpson_rule(lo, hi, flo, fmid, fhi);
  return detail::simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

// E1(x) = Gamma(0, x) by direct quadrature of exp(-t)/t over [x, x + 120],
// with the tolerance tied to the exp(-x) scale of the result.
inline long double e1_quadrature(long double x) {
  auto f = [](long double t) { return std::exp(-t) / t; };
  return simpson_adaptive(f, x, x + 120.0L, 1e-15L * std::exp(-x));
}

// I0 power series in long double.
inline long double i0_series(long double x) {
  const long double q = 0.25L * x * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 400; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (term < sum * 1e-20L) break;
  }
  return sum;
}

inline long double i0_scaled_series(long double x) {
  return std::exp(-x) * i0_series(x);
}

// Marcum Q1 via the canonical Poisson-weighted chi-square tail series:
//   Q1(a,b) = sum_k Pois(k; a^2/2) * P[chi^2_{2k+2} > b^2],
// with the inner Erlang tail accumulated incrementally. Terms are formed in
// log space so large noncentralities stay representable.
inline long double marcum_q1_series(long double a, long double b) {
  if (b == 0.0L) return 1.0L;
  const long double lam = 0.5L * a * a;
  const long double y = 0.5L * b * b;
  if (lam == 0.0L) return std::exp(-y);
  const long double logy = std::log(y);
  const long double loglam = std::log(lam);
  const int kmax = static_cast<int>(lam + 60.0L * std::sqrt(lam + 1.0L) + 60.0L);
  long double erlang_tail = std::exp(-y);  // j = 0 term of the chi tail
  long double sum = 0.0L;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) {
      const long double logt =
          -y + k * logy - std::lgamma(static_cast<long double>(k) + 1.0L);
      erlang_tail += std::exp(logt);
      if (erlang_tail > 1.0L) erlang_tail = 1.0L;
    }
    const long double logw =
        -lam + k * loglam - std::lgamma(static_cast<long double>(k) + 1.0L);
    sum += std::exp(logw) * erlang_tail;
  }
  if (sum < 0.0L) return 0.0L;
  if (sum > 1.0L) return 1.0L;
  return sum;
}

// Closed form for the two-variate energy comparison: with X ~ chi'2_2(a),
// Y ~ chi'2_2(b) independent,
//   P[X > Y] = Q1(sqrt(a/2), sqrt(b/2)) - 0.5 exp(-(a+b)/4) I0(sqrt(ab)/2).
inline long double g_closed_form(long double a, long double b) {
  const long double alpha = std::sqrt(0.5L * a);
  const long double beta = std::sqrt(0.5L * b);
  return marcum_q1_series(alpha, beta) -
         0.5L * std::exp(-0.25L * (a + b)) * i0_series(0.5L * std::sqrt(a * b));
}

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline double binom_sigma(double p, double n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-300) / n);
}

// Monte Carlo estimate of P[|w|^2 + a-shift beats |sqrt(b) + w'|^2] with w,
// w' complex Gaussian, unit variance per real component.
inline McEstimate mc_g_detect(double a, double b, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(b);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = sa + gauss(rng);
    const double x2 = gauss(rng);
    const double y1 = sb + gauss(rng);
    const double y2 = gauss(rng);
    if (x1 * x1 + x2 * x2 > y1 * y1 + y2 * y2) ++hits;
  }
  McEstimate e;
  e.mean = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = binom_sigma(e.mean, static_cast<double>(n));
  return e;
}

// Monte Carlo estimate of P[X + Y < xi] where u ~ Exp(1) is shared and
// X ~ Exp(mean a + b u), Y ~ Exp(mean c + d u).
inline McEstimate mc_m_outage(double a, double b, double c, double d, double xi,
                              std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> unit(1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng);
    const double x = (a + b * u) * unit(rng);
    const double y = (c + d * u) * unit(rng);
    if (x + y < xi) ++hits;
  }
  McEstimate e;
  e.mean = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = binom_sigma(e.mean, static_cast<double>(n));
  return e;
}

// Monte Carlo estimate of P[Z < xi], Z ~ Exp(mean a + b u), u ~ Exp(1).
inline McEstimate mc_m_tilde_outage(double a, double b, double xi,
                                    std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> unit(1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng);
    const double z = (a + b * u) * unit(rng);
    if (z < xi) ++hits;
  }
  McEstimate e;
  e.mean = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = binom_sigma(e.mean, static_cast<double>(n));
  return e;
}

// Log-spaced grid helper: n points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  g.reserve(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    g.push_back(std::exp(llo + (lhi - llo) * i / (n - 1)));
  }
  return g;
}

}  // namespace oracle
