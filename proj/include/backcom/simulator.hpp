#pragma once

// Chip-level Monte Carlo engine. One trial simulates a full symbol for all K
// links: TH-SS pattern draws, coherent backward detection at reader 1,
// non-coherent forward energy detection at tag 1, and per-chip harvesting
// accounting. Synchronous operation supports any K >= 2; asynchronous
// operation models two links where link 2 lags link 1 by a fraction beta of
// one chip. Only link 1 is measured; the other links act as interference and
// as extra energy sources.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "backcom/rng.hpp"
#include "backcom/thss.hpp"
#include "backcom/topology.hpp"

namespace backcom {

enum class SimMode { sync, async };

struct SymbolTrial {
  bool reader_bit_ok = false;     // backward bit of link 1 recovered
  bool tag_bit_ok = false;        // forward bit of link 1 recovered
  double energy_harvested = 0.0;  // joules collected by tag 1 over the symbol
  bool outage = false;            // energy_harvested < E0
};

struct MetricsReport {
  std::uint64_t n_trials = 0;
  double reader_ber = 0.0;
  double reader_ber_se = 0.0;
  double tag_ber = 0.0;
  double tag_ber_se = 0.0;
  double outage_prob = 0.0;
  double outage_se = 0.0;
  double etr_mean = 0.0;  // joules per symbol
  double etr_se = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
};

namespace detail {

// Per-thread scratch so the trial loop performs no allocations.
struct SimWorkspace {
  ChannelRealization ch;
  std::vector<ThssPattern> pat;
  std::vector<int> tx_chip;  // on-chip each reader actually transmitted
  std::vector<double> qsym;  // backscatter symbol of each tag, +1 or -1
};

// Complex incident amplitude at tag 1 during chip c of a synchronous symbol:
// direct terms from every reader transmitting on c, plus single-bounce
// backscatter from every interferer tag whose pattern contains c (each such
// tag reflects the sum of all reader signals arriving at it during c).
inline cplx tag1_incident_sync(const SystemConfig& cfg, const SimWorkspace& ws, int c) {
  const double sp = std::sqrt(cfg.P);
  const double sr = std::sqrt(cfg.rho);
  cplx direct(0.0, 0.0);
  for (int m = 0; m < cfg.K; ++m) {
    if (ws.tx_chip[m] == c) direct += ws.ch.f(m, 0);
  }
  cplx total = sp * direct;
  for (int k = 1; k < cfg.K; ++k) {
    if (ws.pat[k].s0 != c && ws.pat[k].s1 != c) continue;
    cplx at_tag(0.0, 0.0);
    for (int m = 0; m < cfg.K; ++m) {
      if (ws.tx_chip[m] == c) at_tag += ws.ch.f(m, k);
    }
    total += sr * ws.qsym[k] * ws.ch.g(k, 0) * (sp * at_tag);
  }
  return total;
}

// Same amplitude for one asynchronous time segment: the part of link-1 chip c
// that overlaps link-2 chip j2 (two-link networks only). Reader 1 is on for
// the whole of chip tx_chip[0] in link-1 time; reader 2 and tag 2 act in
// link-2 time, so their contributions are gated on j2.
inline cplx tag1_incident_async_seg(const SystemConfig& cfg, const SimWorkspace& ws, int c,
                                    int j2) {
  const double sp = std::sqrt(cfg.P);
  const double sr = std::sqrt(cfg.rho);
  cplx direct(0.0, 0.0);
  if (ws.tx_chip[0] == c) direct += ws.ch.f(0, 0);
  if (ws.tx_chip[1] == j2) direct += ws.ch.f(1, 0);
  cplx total = sp * direct;
  if (ws.pat[1].s0 == j2 || ws.pat[1].s1 == j2) {
    cplx at_tag(0.0, 0.0);
    if (ws.tx_chip[0] == c) at_tag += ws.ch.f(0, 1);
    if (ws.tx_chip[1] == j2) at_tag += ws.ch.f(1, 1);
    total += sr * ws.qsym[1] * ws.ch.g(1, 0) * (sp * at_tag);
  }
  return total;
}

inline SymbolTrial simulate_symbol_ws(const SystemConfig& cfg, TrialRng& rng, SimMode mode,
                                      SimWorkspace& ws) {
  const int K = cfg.K;
  const int N = cfg.N;

  // Fixed draw order per trial: channels, then per link (pattern, forward
  // bit, backscatter symbol), then noise. Parameters such as beta or the
  // coupling flag never change the draw sequence, so runs that differ only
  // in those values consume common random numbers.
  sample_channels(cfg, rng, ws.ch);
  if (static_cast<int>(ws.pat.size()) != K) {
    ws.pat.resize(K);
    ws.tx_chip.resize(K);
    ws.qsym.resize(K);
  }
  int bit1 = 0;
  for (int k = 0; k < K; ++k) {
    ws.pat[k] = generate_pattern(N, rng);
    const int bit = static_cast<int>(rng.next_below(2));
    if (k == 0) bit1 = bit;
    ws.tx_chip[k] = transmitted_chip(ws.pat[k], bit).chip;
    ws.qsym[k] = rng.next_below(2) == 0 ? 1.0 : -1.0;
  }

  // Incident power on each of tag 1's pattern chips. In async mode link-2
  // chip j covers link-1 chips j (fraction 1-beta) and j+1 (fraction beta),
  // so per-chip power is the time-weighted sum over the two segments.
  const int c0 = ws.pat[0].s0;
  const int c1 = ws.pat[0].s1;
  double pow0, pow1;
  if (mode == SimMode::sync) {
    pow0 = std::norm(tag1_incident_sync(cfg, ws, c0));
    pow1 = std::norm(tag1_incident_sync(cfg, ws, c1));
  } else {
    const double beta = cfg.beta;
    auto chip_power = [&](int c) {
      const int prev = c == 0 ? N - 1 : c - 1;
      const double shifted = std::norm(tag1_incident_async_seg(cfg, ws, c, prev));
      const double aligned = std::norm(tag1_incident_async_seg(cfg, ws, c, c));
      return beta * shifted + (1.0 - beta) * aligned;
    };
    pow0 = chip_power(c0);
    pow1 = chip_power(c1);
  }

  // Forward detection: one complex Gaussian sample per on-chip interval on
  // top of the deterministic detector amplitude, then pick the larger energy.
  double w0r = 0.0, w0i = 0.0, w1r = 0.0, w1i = 0.0;
  if (cfg.sigma2_tag > 0.0) {
    const double s = std::sqrt(cfg.sigma2_tag);
    w0r = s * rng.next_normal();
    w0i = s * rng.next_normal();
    w1r = s * rng.next_normal();
    w1i = s * rng.next_normal();
  }
  cplx z(0.0, 0.0);
  if (cfg.sigma2_reader > 0.0) z = draw_cn(rng, cfg.sigma2_reader);

  const double det_scale = cfg.eta * (1.0 - cfg.rho);
  const double a0 = std::sqrt(det_scale * pow0);
  const double a1 = std::sqrt(det_scale * pow1);
  const double e0 = (a0 + w0r) * (a0 + w0r) + w0i * w0i;
  const double e1 = (a1 + w1r) * (a1 + w1r) + w1i * w1i;
  int bhat;
  if (e1 > e0) {
    bhat = 1;
  } else if (e0 > e1) {
    bhat = 0;
  } else {
    bhat = static_cast<int>(rng.next_below(2));
  }

  // Where tag 1 backscatters: both pattern chips by default, or only the
  // estimated on-chip when detection coupling is enabled. The reader samples
  // the true transmitted chip, so a wrong estimate removes the useful term.
  const int C1 = ws.tx_chip[0];
  const bool couple = cfg.couple_tag_detection;
  const int est_chip = transmitted_chip(ws.pat[0], bhat).chip;
  const bool reflect_c0 = couple ? est_chip == c0 : true;
  const bool reflect_c1 = couple ? est_chip == c1 : true;
  const bool tag1_on_tx = couple ? est_chip == C1 : true;

  // Backward detection at reader 1 during chip C1.
  const double sp = std::sqrt(cfg.P);
  const double srp = std::sqrt(cfg.rho * cfg.P);
  const cplx f11 = ws.ch.f(0, 0);
  cplx r1 = z;
  if (mode == SimMode::sync) {
    if (tag1_on_tx) {
      cplx at_tag1(0.0, 0.0);
      for (int m = 0; m < K; ++m) {
        if (ws.tx_chip[m] == C1) at_tag1 += ws.ch.f(m, 0);
      }
      r1 += srp * ws.qsym[0] * std::conj(f11) * at_tag1;
    }
    for (int k = 1; k < K; ++k) {
      if (ws.tx_chip[k] == C1) r1 += sp * ws.ch.h(k, 0);
      if (ws.pat[k].s0 == C1 || ws.pat[k].s1 == C1) {
        cplx at_tag(0.0, 0.0);
        for (int m = 0; m < K; ++m) {
          if (ws.tx_chip[m] == C1) at_tag += ws.ch.f(m, k);
        }
        r1 += srp * ws.qsym[k] * std::conj(ws.ch.f(0, k)) * at_tag;
      }
    }
  } else {
    // Interference terms are amplitude-weighted by their time overlap with
    // chip C1; tag 1's reflection of reader 1's own carrier spans the chip.
    if (tag1_on_tx) r1 += srp * ws.qsym[0] * std::conj(f11) * f11;
    const int prev = C1 == 0 ? N - 1 : C1 - 1;
    const int seg_chip[2] = {prev, C1};
    const double seg_w[2] = {cfg.beta, 1.0 - cfg.beta};
    for (int s = 0; s < 2; ++s) {
      const int j2 = seg_chip[s];
      cplx seg(0.0, 0.0);
      if (ws.tx_chip[1] == j2) {
        seg += sp * ws.ch.h(1, 0);
        if (tag1_on_tx) seg += srp * ws.qsym[0] * std::conj(f11) * ws.ch.f(1, 0);
      }
      if (ws.pat[1].s0 == j2 || ws.pat[1].s1 == j2) {
        cplx at_tag = ws.ch.f(0, 1);
        if (ws.tx_chip[1] == j2) at_tag += ws.ch.f(1, 1);
        seg += srp * ws.qsym[1] * std::conj(ws.ch.f(0, 1)) * at_tag;
      }
      r1 += seg_w[s] * seg;
    }
  }
  const double stat = srp * std::norm(f11) * r1.real();
  const double qhat = stat > 0.0 ? 1.0 : (stat < 0.0 ? -1.0 : 1.0);

  // Harvesting: pattern chips keep the (1-rho) fraction while the tag
  // backscatters on them, the full incident power otherwise; off-chips hit
  // by an interferer on-chip are harvested whole. Noise is not harvested.
  const double chip_t = cfg.T / N;
  double energy = cfg.eta * (reflect_c0 ? 1.0 - cfg.rho : 1.0) * pow0 * chip_t +
                  cfg.eta * (reflect_c1 ? 1.0 - cfg.rho : 1.0) * pow1 * chip_t;
  if (mode == SimMode::sync) {
    for (int k = 1; k < K; ++k) {
      const int c = ws.tx_chip[k];
      if (c == c0 || c == c1) continue;
      bool seen = false;
      for (int j = 1; j < k; ++j) {
        if (ws.tx_chip[j] == c) {
          seen = true;
          break;
        }
      }
      if (seen) continue;
      energy += cfg.eta * std::norm(tag1_incident_sync(cfg, ws, c)) * chip_t;
    }
  } else {
    const int C2 = ws.tx_chip[1];
    const int spill = C2 + 1 == N ? 0 : C2 + 1;
    const int off_chip[2] = {C2, spill};
    const double off_w[2] = {1.0 - cfg.beta, cfg.beta};
    for (int s = 0; s < 2; ++s) {
      const int c = off_chip[s];
      if (c == c0 || c == c1) continue;
      energy += cfg.eta * off_w[s] * std::norm(tag1_incident_async_seg(cfg, ws, c, C2)) * chip_t;
    }
  }

  SymbolTrial out;
  out.reader_bit_ok = qhat == ws.qsym[0];
  out.tag_bit_ok = bhat == bit1;
  out.energy_harvested = energy;
  out.outage = energy < cfg.E0;
  return out;
}

inline void check_mode(const SystemConfig& cfg, SimMode mode) {
  if (mode == SimMode::async) {
    if (cfg.K != 2) throw std::invalid_argument("simulate_symbol: async mode requires K = 2");
    if (cfg.N < 6) throw std::invalid_argument("simulate_symbol: async mode requires N >= 6");
  }
}

}  // namespace detail

// One full symbol for all K links; measures link 1 only.
inline SymbolTrial simulate_symbol(const SystemConfig& cfg, TrialRng& rng, SimMode mode) {
  detail::check_mode(cfg, mode);
  detail::SimWorkspace ws;
  return detail::simulate_symbol_ws(cfg, rng, mode, ws);
}

// Aggregates n_trials independent symbols. Each trial runs on its own rng
// substream keyed by (seed, trial index) and trials are grouped into fixed
// 65536-trial blocks whose partial sums are reduced in block order, so the
// report is bit-identical for every worker count.
inline MetricsReport run_trials(const SystemConfig& cfg, std::uint64_t n_trials,
                                std::uint64_t seed, SimMode mode, unsigned workers = 0) {
  validate(cfg);
  detail::check_mode(cfg, mode);
  if (n_trials == 0) throw std::invalid_argument("run_trials: n_trials must be at least 1");

  constexpr std::uint64_t kBlock = 65536;
  const std::uint64_t n_blocks = (n_trials + kBlock - 1) / kBlock;

  struct BlockPartial {
    std::uint64_t reader_err = 0;
    std::uint64_t tag_err = 0;
    std::uint64_t outage = 0;
    double e_sum = 0.0;
    double e_sq_sum = 0.0;
  };
  std::vector<BlockPartial> parts(n_blocks);
  std::atomic<std::uint64_t> next_block{0};

  auto worker_fn = [&]() {
    detail::SimWorkspace ws;
    for (;;) {
      const std::uint64_t b = next_block.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(n_trials, lo + kBlock);
      BlockPartial acc;
      for (std::uint64_t t = lo; t < hi; ++t) {
        TrialRng rng(seed, t);
        const SymbolTrial s = detail::simulate_symbol_ws(cfg, rng, mode, ws);
        acc.reader_err += s.reader_bit_ok ? 0u : 1u;
        acc.tag_err += s.tag_bit_ok ? 0u : 1u;
        acc.outage += s.outage ? 1u : 0u;
        acc.e_sum += s.energy_harvested;
        acc.e_sq_sum += s.energy_harvested * s.energy_harvested;
      }
      parts[b] = acc;
    }
  };

  unsigned n_workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  n_workers = static_cast<unsigned>(std::min<std::uint64_t>(n_workers, n_blocks));
  if (n_workers <= 1) {
    worker_fn();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
  }

  std::uint64_t reader_err = 0;
  std::uint64_t tag_err = 0;
  std::uint64_t outage = 0;
  double e_sum = 0.0;
  double e_sq_sum = 0.0;
  for (const BlockPartial& bp : parts) {
    reader_err += bp.reader_err;
    tag_err += bp.tag_err;
    outage += bp.outage;
    e_sum += bp.e_sum;
    e_sq_sum += bp.e_sq_sum;
  }

  const double n = static_cast<double>(n_trials);
  auto proportion = [n](std::uint64_t count, double& est, double& se) {
    est = static_cast<double>(count) / n;
    se = std::sqrt(std::max(0.0, est * (1.0 - est) / n));
  };
  MetricsReport rep;
  rep.n_trials = n_trials;
  proportion(reader_err, rep.reader_ber, rep.reader_ber_se);
  proportion(tag_err, rep.tag_ber, rep.tag_ber_se);
  proportion(outage, rep.outage_prob, rep.outage_se);
  rep.etr_mean = e_sum / n;
  rep.etr_se = std::sqrt(std::max(0.0, (e_sq_sum / n - rep.etr_mean * rep.etr_mean) / n));
  rep.seed = seed;
  rep.config_digest = config_digest(cfg);
  return rep;
}

}  // namespace backcom
