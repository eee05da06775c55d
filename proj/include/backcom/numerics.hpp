#pragma once

// Special functions and adaptive quadrature used by the closed-form
// performance expressions: Q, scaled erfc, modified Bessel I0, Marcum Q1,
// the exponential integral, the energy-detector comparison probability G,
// and the two outage integrals M and M~.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace backcom {

// Tolerances for the adaptive quadrature routines. truncation_cap bounds the
// semi-infinite integrals: every integrand in this library carries an exp(-x)
// envelope, so the tail beyond the cap is below exp(-cap), far under abs_tol.
struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  double truncation_cap = 60.0;
};

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Gauss-Kronrod 7-15 pair. Nodes are the positive Kronrod abscissae on
// [-1, 1]; odd indices (plus the center) form the embedded Gauss rule.
inline constexpr double kron_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kron_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double gauss_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  double integral = 0.0;
  double error = 0.0;
};

template <class F>
Segment gauss_kronrod(const F& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double k15 = 0.0;
  double g7 = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kron_x[i];
    const double pair = f(mid - dx) + f(mid + dx);
    k15 += kron_w[i] * pair;
    if (i % 2 == 1) g7 += gauss_w[i / 2] * pair;
  }
  const double fc = f(mid);
  k15 += kron_w[7] * fc;
  g7 += gauss_w[3] * fc;
  Segment s;
  s.lo = lo;
  s.hi = hi;
  s.integral = half * k15;
  s.error = half * std::abs(k15 - g7);
  if (!std::isfinite(s.integral)) {
    throw QuadratureError("quadrature: integrand produced a non-finite value");
  }
  return s;
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [lo, hi]. Globally refines the
// segment with the largest error estimate until the summed error drops below
// max(abs_tol, rel_tol * |integral|); signals QuadratureError on stall.
template <class F>
double integrate_interval(const F& f, double lo, double hi,
                          const QuadratureSpec& spec = {}) {
  if (!(hi > lo)) return 0.0;
  constexpr int max_segments = 2048;
  std::vector<detail::Segment> segs;
  const int initial = std::clamp(static_cast<int>((hi - lo) / 8.0) + 1, 4, 16);
  segs.reserve(64);
  for (int i = 0; i < initial; ++i) {
    const double a = lo + (hi - lo) * i / initial;
    const double b = lo + (hi - lo) * (i + 1) / initial;
    segs.push_back(detail::gauss_kronrod(f, a, b));
  }
  while (true) {
    double total = 0.0;
    double err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].integral;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
      return total;
    }
    if (segs.size() >= max_segments) {
      throw QuadratureError("quadrature: refinement stalled before tolerance");
    }
    const detail::Segment s = segs[worst];
    const double mid = 0.5 * (s.lo + s.hi);
    if (!(mid > s.lo && mid < s.hi)) {
      throw QuadratureError("quadrature: interval too narrow to refine");
    }
    segs[worst] = detail::gauss_kronrod(f, s.lo, mid);
    segs.push_back(detail::gauss_kronrod(f, mid, s.hi));
  }
}

// Integral of f over [0, inf) for integrands with an exponential envelope;
// truncated at spec.truncation_cap.
template <class F>
double integrate_semi_infinite(const F& f, const QuadratureSpec& spec = {}) {
  return integrate_interval(f, 0.0, spec.truncation_cap, spec);
}

// Gaussian tail probability Q(x) = P[N(0,1) > x] = erfc(x / sqrt(2)) / 2.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Scaled complementary error function exp(x^2) * erfc(x), stable for large x.
inline double erfcx(double x) {
  if (x < 0.0) {
    if (x < -26.0) {
      throw std::overflow_error("erfcx: result exceeds double range");
    }
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 4.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, evaluated bottom-up.
  double cf = 0.0;
  for (int k = 24; k >= 1; --k) cf = (0.5 * k) / (x + cf);
  return (1.0 / std::sqrt(std::numbers::pi)) / (x + cf);
}

// exp(-x) * I0(x) for x >= 0. Power series below x = 18, asymptotic series
// above; never overflows.
inline double bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) throw std::domain_error("bessel_i0: negative argument");
  if (x < 18.0) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 90; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::exp(-x) * sum;
  }
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 40; ++k) {
    const double n = 2.0 * k - 1.0;
    term *= n * n / (8.0 * k * x);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

// Modified Bessel function I0(x). Signals overflow where exp(x) * i0e(x) is
// not representable; callers embedding I0 in exponentially damped integrands
// should use bessel_i0_scaled instead.
inline double bessel_i0(double x) {
  const double scaled = bessel_i0_scaled(x);
  if (x + std::log(scaled) > 709.0) {
    throw std::overflow_error("bessel_i0: result exceeds double range");
  }
  return std::exp(x) * scaled;
}

namespace detail {

// e^x * E1(x) for x > 1 via the standard continued fraction (modified Lentz).
inline double exp_e1_cf(double x) {
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 200; ++k) {
    const double a = -static_cast<double>(k) * k;
    b += 2.0;
    d = a * d + b;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

// Upper incomplete gamma Gamma(0, x) = E1(x), x > 0.
inline double gamma_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_e1: argument must be positive");
  if (x <= 1.0) {
    constexpr double euler = 0.5772156649015328606;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 48; ++k) {
      term *= -x / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-18) break;
    }
    return -euler - std::log(x) + sum;
  }
  return std::exp(-x) * detail::exp_e1_cf(x);
}

// exp(x) * Gamma(0, x), stable for arbitrarily large x. The closed forms
// multiply Gamma(0, z) by exp(z) with z up to ~1e6, where the two factors
// individually under/overflow.
inline double exp_gamma_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("exp_gamma_e1: argument must be positive");
  if (x <= 1.0) return std::exp(x) * gamma_e1(x);
  return detail::exp_e1_cf(x);
}

// First-order Marcum Q-function Q1(a, b) = P[Rice(a, 1) > b], computed from
// the integral of the Rice density with the Bessel factor kept in scaled
// form; accurate for noncentralities far beyond the naive series range.
inline double marcum_q1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw std::domain_error("marcum_q1: negative argument");
  }
  if (b == 0.0) return 1.0;
  if (a == 0.0) return std::exp(-0.5 * b * b);
  // Outside a +-46 sigma window the tail mass is below 1e-200.
  if (b >= a + 46.0) return 0.0;
  if (a >= b + 46.0) return 1.0;
  const double hi = std::max(a, b) + 46.0;
  auto rice_tail = [a](double t) {
    const double dev = t - a;
    return t * bessel_i0_scaled(a * t) * std::exp(-0.5 * dev * dev);
  };
  const QuadratureSpec tight{1e-13, 1e-12, 0.0};
  return std::clamp(integrate_interval(rice_tail, b, hi, tight), 0.0, 1.0);
}

// G(a, b) = P[X > Y] for independent X ~ noncentral chi-square(2, a) and
// Y ~ noncentral chi-square(2, b): the energy-detector error probability with
// noise-normalized signal energies a (off chip) and b (on chip).
inline double g_detect(double a, double b, const QuadratureSpec& spec = {}) {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw std::domain_error("g_detect: negative argument");
  }
  const double sa = std::sqrt(a);
  const double sb = std::sqrt(b);
  if (sa >= sb + 92.0) return 1.0;
  if (sb >= sa + 92.0) return 0.0;
  const double lo = std::max(0.0, sb - 46.0);
  const double hi = sb + 46.0;
  // Condition on Y = t^2 (Rice-distributed amplitude t) and integrate the
  // tail of X against it.
  auto integrand = [sa, sb](double t) {
    const double dev = t - sb;
    return marcum_q1(sa, t) * t * bessel_i0_scaled(sb * t) *
           std::exp(-0.5 * dev * dev);
  };
  return std::clamp(integrate_interval(integrand, lo, hi, spec), 0.0, 1.0);
}

// Energy-outage building block M(a, b, c, d): P[X + Y < xi] where,
// conditioned on u ~ Exp(1), X ~ Exp(mean a + b u) and Y ~ Exp(mean c + d u).
// The difference quotient has a removable singularity where the two
// conditional means cross; near it the symmetric-midpoint derivative form is
// used, which is second-order accurate and free of cancellation.
inline double m_outage(double a, double b, double c, double d, double xi,
                       const QuadratureSpec& spec = {}) {
  if (!(a > 0.0) || !(c > 0.0) || !(b >= 0.0) || !(d >= 0.0)) {
    throw std::domain_error("m_outage: rates must be positive (a, c) or non-negative (b, d)");
  }
  if (!(xi >= 0.0)) throw std::domain_error("m_outage: xi must be non-negative");
  if (xi == 0.0) return 0.0;
  auto integrand = [=](double u) {
    const double A = a + b * u;
    const double C = c + d * u;
    double survive;
    if (std::abs(A - C) > 1e-6 * (A + C)) {
      survive = (A * std::exp(-xi / A) - C * std::exp(-xi / C)) / (A - C);
    } else {
      const double m = 0.5 * (A + C);
      survive = std::exp(-xi / m) * (1.0 + xi / m);
    }
    return (1.0 - survive) * std::exp(-u);
  };
  return std::clamp(integrate_semi_infinite(integrand, spec), 0.0, 1.0);
}

// Single-variable counterpart M~(a, b): P[Z < xi] where, conditioned on
// u ~ Exp(1), Z ~ Exp(mean a + b u).
inline double m_tilde_outage(double a, double b, double xi,
                             const QuadratureSpec& spec = {}) {
  if (!(a > 0.0) || !(b >= 0.0)) {
    throw std::domain_error("m_tilde_outage: invalid rates");
  }
  if (!(xi >= 0.0)) throw std::domain_error("m_tilde_outage: xi must be non-negative");
  if (xi == 0.0) return 0.0;
  auto integrand = [=](double u) {
    return (1.0 - std::exp(-xi / (a + b * u))) * std::exp(-u);
  };
  return std::clamp(integrate_semi_infinite(integrand, spec), 0.0, 1.0);
}

}  // namespace backcom
