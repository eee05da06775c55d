#pragma once

// Closed-form performance expressions for the two-link and K-link networks:
// backward (reader) BER, forward (tag) BER, expected energy-transfer rate,
// and energy-outage probability, for synchronous and asynchronous operation.
//
// Fading-channel forms are evaluated from their defining probabilities and
// expectations: condition on the tag-tag channel power, reduce each event to
// independent exponentials, and integrate the conditional expression by
// quadrature. Equivalent closed forms in terms of special functions are kept
// as regression cross-checks in the tests.

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "backcom/numerics.hpp"
#include "backcom/thss.hpp"
#include "backcom/topology.hpp"

namespace backcom {

// Receive powers at tag 1 for one channel draw and one interferer symbol q2,
// in watts. p0: own carrier only; p1: full collision with the interferer's
// transmitted chip; p2: interferer's transmitted chip alone on a pattern
// chip; p3: own carrier plus the interferer tag's silent-chip backscatter;
// peh: interferer's transmitted chip landing off the pattern (harvest only,
// no reflection split).
struct ChipPowerSet {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double peh = 0.0;
};

// Dimensionless per-symbol energy threshold xi = N E0 / (eta P T).
struct OutageScale {
  double xi = 0.0;
};

// Coefficients of the fading energy-transfer rate as a quadratic in rho:
// etr = (eta P T / N) (nu1 rho^2 + nu2 rho + nu3).
struct EtrCoefficients {
  double nu1 = 0.0;
  double nu2 = 0.0;
  double nu3 = 0.0;
};

namespace detail {

// Large-scale power gains of the two-link geometry. a11/a21: direct reader
// paths to tag 1; g12/g22: double-bounce products reader -> tag 2 -> tag 1.
struct TwoLinkGains {
  double a11 = 0.0;
  double a21 = 0.0;
  double g12 = 0.0;
  double g22 = 0.0;
};

inline TwoLinkGains two_link_gains(const SystemConfig& cfg) {
  TwoLinkGains g;
  g.a11 = path_loss_variance(cfg.d_reader_tag(0, 0), cfg.lambda);
  g.a21 = path_loss_variance(cfg.d_reader_tag(1, 0), cfg.lambda);
  const double dt = cfg.d_tag_tag(1, 0);
  g.g12 = path_loss_variance(cfg.d_reader_tag(0, 1) * dt, cfg.lambda);
  g.g22 = path_loss_variance(cfg.d_reader_tag(1, 1) * dt, cfg.lambda);
  return g;
}

// P[Y > X] for conditionally independent exponentials with means a + b u
// (X) and c + d u (Y), averaged over u ~ Exp(1).
inline double exp_ratio_prob(double a, double b, double c, double d,
                             const QuadratureSpec& spec = {}) {
  auto integrand = [=](double u) {
    const double mx = a + b * u;
    const double my = c + d * u;
    return std::exp(-u) * my / (mx + my);
  };
  return std::clamp(integrate_semi_infinite(integrand, spec), 0.0, 1.0);
}

inline const ChannelRealization& static_channels_of(const SystemConfig& cfg,
                                                    const char* who) {
  if (!cfg.static_coeffs) {
    throw std::invalid_argument(std::string(who) + ": static coefficients missing");
  }
  return *cfg.static_coeffs;
}

}  // namespace detail

inline OutageScale outage_scale(const SystemConfig& cfg) {
  return OutageScale{cfg.N * cfg.E0 / (cfg.eta * cfg.P * cfg.T)};
}

inline ChipPowerSet chip_powers(const SystemConfig& cfg, const ChannelRealization& ch,
                                int q2) {
  const cplx f11 = ch.f(0, 0);
  const cplx f12 = ch.f(0, 1);
  const cplx f21 = ch.f(1, 0);
  const cplx f22 = ch.f(1, 1);
  const cplx g21 = ch.g(1, 0);
  const double sr = std::sqrt(cfg.rho);
  const double on = cfg.eta * cfg.P * (1.0 - cfg.rho);
  const cplx bounce = sr * static_cast<double>(q2) * g21;
  ChipPowerSet p;
  p.p0 = on * std::norm(f11);
  p.p1 = on * std::norm(f11 + f21 + bounce * (f12 + f22));
  p.p2 = on * std::norm(f21 + bounce * f22);
  p.p3 = on * std::norm(f11 + bounce * f12);
  p.peh = cfg.eta * cfg.P * std::norm(f21 + bounce * f22);
  return p;
}

// Bit error probability of the coherent BPSK decision on an interference-free
// chip. Static: Q(sqrt(2 P rho |f11|^4 / sigma2_reader)). Rayleigh: the
// exponential average of the same Q in scaled-erfc closed form.
inline double p_bpsk(const SystemConfig& cfg,
                     const std::optional<ChannelRealization>& ch = std::nullopt) {
  if (cfg.channel_model == ChannelModel::static_coeffs || ch.has_value()) {
    const ChannelRealization& c =
        ch.has_value() ? *ch : detail::static_channels_of(cfg, "p_bpsk");
    const double f2 = std::norm(c.f(0, 0));
    if (f2 == 0.0) return 0.5;
    if (cfg.sigma2_reader == 0.0) return 0.0;
    return q_function(std::sqrt(2.0 * cfg.P * cfg.rho * f2 * f2 / cfg.sigma2_reader));
  }
  const double a11 = path_loss_variance(cfg.d_reader_tag(0, 0), cfg.lambda);
  const double z = (0.5 / a11) * std::sqrt(cfg.sigma2_reader / (cfg.P * cfg.rho));
  return 0.5 * (1.0 - erfcx(z));
}

// Backward-link BER with synchronous hopping: interference-free chips decide
// at p_bpsk; a pattern collision (probability 2/N) is chance level.
inline double reader_ber_sync(const SystemConfig& cfg,
                              const std::optional<ChannelRealization>& ch = std::nullopt) {
  const double n = static_cast<double>(cfg.N);
  return (n - 2.0) / n * p_bpsk(cfg, ch) + 1.0 / n;
}

// Forward-link BER for a fixed channel draw. With high_snr the noise is
// ignored and only the strict energy orderings matter; otherwise every
// overlap scenario contributes its noncentral-energy comparison error.
inline double tag_ber_static(const SystemConfig& cfg, const ChannelRealization& ch,
                             bool high_snr = true) {
  const double nn = static_cast<double>(cfg.N) * (cfg.N - 1);
  const double pa = (cfg.N - 2.0) / nn;
  const double pb = 1.0 / nn;
  const OverlapProbs op = overlap_probs(cfg.N);
  double acc = 0.0;
  for (const int q2 : {+1, -1}) {
    const ChipPowerSet cp = chip_powers(cfg, ch, q2);
    if (high_snr) {
      acc += pa * (cp.p2 > cp.p0 ? 1.0 : 0.0) + pb * (cp.p2 > cp.p3 ? 1.0 : 0.0);
      continue;
    }
    if (cfg.sigma2_tag == 0.0) {
      auto cmp = [](double off, double onp) {
        return off > onp ? 1.0 : (off == onp ? 0.5 : 0.0);
      };
      acc += (op.p0 + 0.25 * op.p1) * cmp(0.0, cp.p0) +
             0.25 * op.p1 * (cmp(0.0, cp.p1) + cmp(cp.p2, cp.p0) + cmp(0.0, cp.p3)) +
             0.5 * op.p2 * (cmp(0.0, cp.p1) + cmp(cp.p2, cp.p3));
      continue;
    }
    const double s2 = cfg.sigma2_tag;
    acc += (op.p0 + 0.25 * op.p1) * g_detect(0.0, cp.p0 / s2) +
           0.25 * op.p1 *
               (g_detect(0.0, cp.p1 / s2) + g_detect(cp.p2 / s2, cp.p0 / s2) +
                g_detect(0.0, cp.p3 / s2)) +
           0.5 * op.p2 * (g_detect(0.0, cp.p1 / s2) + g_detect(cp.p2 / s2, cp.p3 / s2));
  }
  return 0.5 * acc;
}

// Forward-link BER under Rayleigh fading, high-SNR regime: the two
// energy-ordering probabilities weighted by their scenario frequencies.
inline double tag_ber_fading(const SystemConfig& cfg) {
  const detail::TwoLinkGains g = detail::two_link_gains(cfg);
  const double r = cfg.rho;
  const double nn = static_cast<double>(cfg.N) * (cfg.N - 1);
  const double p20 = detail::exp_ratio_prob(g.a11, 0.0, g.a21, r * g.g22);
  const double p23 = detail::exp_ratio_prob(g.a11, r * g.g12, g.a21, r * g.g22);
  return (cfg.N - 2.0) / nn * p20 + 1.0 / nn * p23;
}

namespace detail {

inline double etr_from_powers(const SystemConfig& cfg, const ChipPowerSet& cp) {
  const double n = static_cast<double>(cfg.N);
  return cfg.T / n * ((n - 2.0) / n * (cp.p0 + cp.peh) + (cp.p1 + cp.p2 + cp.p3) / n);
}

}  // namespace detail

// Expected harvested energy per symbol, fixed channel draw, exact in the
// scenario probabilities, averaged over the interferer symbol.
inline double etr_static(const SystemConfig& cfg, const ChannelRealization& ch) {
  double acc = 0.0;
  for (const int q2 : {+1, -1}) acc += detail::etr_from_powers(cfg, chip_powers(cfg, ch, q2));
  return 0.5 * acc;
}

inline EtrCoefficients etr_coefficients(const SystemConfig& cfg) {
  const detail::TwoLinkGains g = detail::two_link_gains(cfg);
  const double n = static_cast<double>(cfg.N);
  EtrCoefficients c;
  c.nu1 = -2.0 / n * (g.g12 + g.g22);
  c.nu2 = (g.g22 - g.a11) + 2.0 / n * (g.g12 - g.a21);
  c.nu3 = g.a11 + g.a21;
  return c;
}

// Expected harvested energy per symbol under Rayleigh fading: a quadratic
// in rho obtained by replacing each receive power with its expectation.
inline double etr_fading(const SystemConfig& cfg) {
  const EtrCoefficients c = etr_coefficients(cfg);
  const double r = cfg.rho;
  return cfg.eta * cfg.P * cfg.T / cfg.N * ((c.nu1 * r + c.nu2) * r + c.nu3);
}

// Energy-outage probability under Rayleigh fading: the five harvest
// compositions (own chip + off-pattern hit, own chip + pattern hit, silent
// backscatter + off-pattern hit, the doubly-hit pattern, and the full
// collision) weighted by their joint scenario probabilities.
inline double outage_fading(const SystemConfig& cfg) {
  const detail::TwoLinkGains g = detail::two_link_gains(cfg);
  const double xi = outage_scale(cfg).xi;
  if (xi == 0.0) return 0.0;
  const double r = cfg.rho;
  const double om = 1.0 - r;
  const double n = static_cast<double>(cfg.N);
  const double nn = n * (n - 1.0);
  const double w1 = (n - 2.0) * (n - 2.0) / nn;
  const double w2 = (n - 2.0) / nn;
  const double w3 = 1.0 / nn;
  const double w4 = 1.0 / n;
  return std::clamp(
      w1 * m_outage(om * g.a11, 0.0, g.a21, r * g.g22, xi) +
          w2 * (m_outage(om * g.a11, 0.0, om * g.a21, om * r * g.g22, xi) +
                m_outage(om * g.a11, om * r * g.g12, g.a21, r * g.g22, xi)) +
          w3 * m_outage(om * g.a11, om * r * g.g12, om * g.a21, om * r * g.g22, xi) +
          w4 * m_tilde_outage(om * (g.a11 + g.a21), om * r * (g.g12 + g.g22), xi),
      0.0, 1.0);
}

// Energy-outage probability for a fixed channel draw at zero noise: each
// scenario's harvest is deterministic given the interferer symbol, so the
// outage is a weighted fraction of indicator events.
inline double outage_static(const SystemConfig& cfg, const ChannelRealization& ch) {
  const double n = static_cast<double>(cfg.N);
  const double nn = n * (n - 1.0);
  const double w1 = (n - 2.0) * (n - 2.0) / nn;
  const double w2 = (n - 2.0) / nn;
  const double w3 = 1.0 / nn;
  const double w4 = 1.0 / n;
  const double scale = cfg.T / n;
  double acc = 0.0;
  for (const int q2 : {+1, -1}) {
    const ChipPowerSet cp = chip_powers(cfg, ch, q2);
    auto below = [&](double power_sum) {
      return scale * power_sum < cfg.E0 ? 1.0 : 0.0;
    };
    acc += w1 * below(cp.p0 + cp.peh) + w2 * (below(cp.p0 + cp.p2) + below(cp.p3 + cp.peh)) +
           w3 * below(cp.p3 + cp.p2) + w4 * below(cp.p1);
  }
  return 0.5 * acc;
}

// Backward-link BER with a fractional-chip delay offset: any partial overlap
// of the interferer's pattern is scored as chance level, independent of the
// offset fraction.
inline double reader_ber_async(const SystemConfig& cfg,
                               const std::optional<ChannelRealization>& ch = std::nullopt) {
  const double n = static_cast<double>(cfg.N);
  const double nn = n * (n - 1.0);
  return p_bpsk(cfg, ch) * (n - 3.0) * (n - 2.0) / nn + (2.0 * n - 3.0) / nn;
}

// Forward-link BER with delay offset beta, Rayleigh fading, large-N regime:
// the two partial-overlap fractions beta and 1-beta each contribute one
// energy-ordering probability.
inline double tag_ber_async(const SystemConfig& cfg, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("tag_ber_async: beta must lie in [0,1]");
  }
  const detail::TwoLinkGains g = detail::two_link_gains(cfg);
  const double r = cfg.rho;
  auto overlap_error = [&](double c) -> double {
    if (c == 0.0) return 0.0;
    auto integrand = [&](double u) {
      return std::exp(-u) * g.a11 / (g.a11 + c * (g.a21 + r * g.g22 * u));
    };
    return 1.0 - integrate_semi_infinite(integrand);
  };
  return std::clamp((overlap_error(beta) + overlap_error(1.0 - beta)) / cfg.N, 0.0, 1.0);
}

// The delay offset averages out of the harvested energy: asynchronous ETR
// equals the synchronous value exactly.
inline double etr_async(const SystemConfig& cfg) {
  if (cfg.channel_model == ChannelModel::static_coeffs) {
    return etr_static(cfg, detail::static_channels_of(cfg, "etr_async"));
  }
  return etr_fading(cfg);
}

// Backward-link BER with K-1 interfering links: the chip survives every
// interferer pattern with probability ((N-2)/N)^(K-1); otherwise chance.
inline double reader_ber_klink(const SystemConfig& cfg,
                               const std::optional<ChannelRealization>& ch = std::nullopt) {
  const double n = static_cast<double>(cfg.N);
  const double w = std::pow((n - 2.0) / n, cfg.K - 1);
  return p_bpsk(cfg, ch) * w + 0.5 * (1.0 - w);
}

// Forward-link BER with K-1 interferers, dominant-scenario approximation:
// exactly one interferer hits the silent pattern chip and outpowers the
// carrier, all others miss.
inline double tag_ber_klink(const SystemConfig& cfg) {
  const double n = static_cast<double>(cfg.N);
  const double nn = n * (n - 1.0);
  const double p0 = overlap_probs(cfg.N).p0;
  const double a11 = path_loss_variance(cfg.d_reader_tag(0, 0), cfg.lambda);
  double sum = 0.0;
  for (int k = 1; k < cfg.K; ++k) {
    const double ak1 = path_loss_variance(cfg.d_reader_tag(k, 0), cfg.lambda);
    const double gkk = path_loss_variance(
        cfg.d_reader_tag(k, k) * cfg.d_tag_tag(k, 0), cfg.lambda);
    sum += detail::exp_ratio_prob(a11, 0.0, ak1, cfg.rho * gkk);
  }
  return std::clamp((n - 2.0) / nn * std::pow(p0, cfg.K - 2) * sum, 0.0, 1.0);
}

// Large-N energy asymptotics with K-1 interferers: expected ETR keeps the
// own-carrier harvest plus every interferer's off-pattern hit; the outage is
// the probability that this harvest sum stays below the threshold, computed
// by convolving the component densities on a uniform grid over [0, xi].
inline std::pair<double, double> klink_et_asymptotics(const SystemConfig& cfg) {
  const double r = cfg.rho;
  const double a11 = path_loss_variance(cfg.d_reader_tag(0, 0), cfg.lambda);
  std::vector<double> ak1(cfg.K, 0.0);
  std::vector<double> gkk(cfg.K, 0.0);
  double mean_sum = (1.0 - r) * a11;
  for (int k = 1; k < cfg.K; ++k) {
    ak1[k] = path_loss_variance(cfg.d_reader_tag(k, 0), cfg.lambda);
    gkk[k] = path_loss_variance(cfg.d_reader_tag(k, k) * cfg.d_tag_tag(k, 0), cfg.lambda);
    mean_sum += ak1[k] + r * gkk[k];
  }
  const double etr = cfg.eta * cfg.P * cfg.T / cfg.N * mean_sum;

  const double xi = outage_scale(cfg).xi;
  if (xi == 0.0) return {etr, 0.0};

  const int M = 4097;
  const double h = xi / (M - 1);
  // Density of the own-carrier harvest (1-rho) |f11|^2 on the grid.
  const double a0 = (1.0 - r) * a11;
  std::vector<double> acc(M);
  for (int i = 0; i < M; ++i) acc[i] = std::exp(-(i * h) / a0) / a0;

  std::vector<double> comp(M);
  std::vector<double> next(M);
  for (int k = 1; k < cfg.K; ++k) {
    // Marginal density of one interferer's off-pattern harvest, integrating
    // the conditional exponential over the tag-tag channel power.
    for (int i = 0; i < M; ++i) {
      const double y = i * h;
      auto integrand = [&](double u) {
        const double m = ak1[k] + r * gkk[k] * u;
        return std::exp(-u - y / m) / m;
      };
      comp[i] = integrate_semi_infinite(integrand);
    }
    for (int i = 0; i < M; ++i) {
      double s = 0.5 * (acc[0] * comp[i] + acc[i] * comp[0]);
      for (int j = 1; j < i; ++j) s += acc[j] * comp[i - j];
      next[i] = s * h;
    }
    acc.swap(next);
  }
  double prob = 0.5 * (acc[0] + acc[M - 1]);
  for (int i = 1; i < M - 1; ++i) prob += acc[i];
  prob *= h;
  return {etr, std::clamp(prob, 0.0, 1.0)};
}

}  // namespace backcom
