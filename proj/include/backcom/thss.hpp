#pragma once

// TH-SS pattern generation and every overlap-scenario probability: the
// synchronous two-link classes, the asynchronous sub-scenario table, and the
// K-link union-overlap classes.

#include <stdexcept>

#include "backcom/rng.hpp"

namespace backcom {

// A link's two on-chip positions; the transmitted on-chip is s0 for forward
// bit 0 and s1 for bit 1.
struct ThssPattern {
  int s0 = 0;
  int s1 = 0;
};

struct TransmittedChip {
  int chip = 0;
  int bit = 0;
};

inline TransmittedChip transmitted_chip(const ThssPattern& p, int bit) {
  return TransmittedChip{bit ? p.s1 : p.s0, bit};
}

// Probabilities that two independent patterns share 0, 1, or 2 chips.
struct OverlapProbs {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

// Joint probabilities of the asynchronous sub-scenarios, indexed by whether
// link 1's chips are disjunct (d) or consecutive (c), the number of link-2
// chips overlapping link 1's pattern, and the arrangement index.
struct AsyncScenarioProbs {
  double p_dis = 0.0;
  double p_con = 0.0;
  double pd0 = 0.0;
  double pd1_1 = 0.0;
  double pd1_2 = 0.0;
  double pd2_1 = 0.0;
  double pd2_2 = 0.0;
  double pd2_3 = 0.0;
  double pd2_4 = 0.0;
  double pc0 = 0.0;
  double pc1_1 = 0.0;
  double pc1_2 = 0.0;
  double pc1_3 = 0.0;
  double pc2_1 = 0.0;
  double pc2_2 = 0.0;
  double pc2_3 = 0.0;
};

// Probabilities that 0, 1, or 2 of link 1's chips are covered by the union
// of the other K-1 links' patterns.
struct KLinkOverlapProbs {
  double rho0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
};

// Uniform over all N(N-1) ordered distinct chip pairs: equivalently a
// uniform unordered pair plus an independent uniform orientation.
inline ThssPattern generate_pattern(int N, TrialRng& rng) {
  if (N < 4) throw std::invalid_argument("generate_pattern: N must be at least 4");
  const int s0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(N)));
  int s1 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(N - 1)));
  if (s1 >= s0) ++s1;
  return ThssPattern{s0, s1};
}

// |{a.s0, a.s1} ∩ {b.s0, b.s1}|, orientation-blind.
inline int classify_overlap(const ThssPattern& a, const ThssPattern& b) {
  const int hits = (a.s0 == b.s0 || a.s0 == b.s1 ? 1 : 0) +
                   (a.s1 == b.s0 || a.s1 == b.s1 ? 1 : 0);
  return hits;
}

inline OverlapProbs overlap_probs(int N) {
  if (N < 4) throw std::invalid_argument("overlap_probs: N must be at least 4");
  const double nn = static_cast<double>(N) * (N - 1);
  OverlapProbs p;
  p.p0 = static_cast<double>(N - 2) * (N - 3) / nn;
  p.p1 = 4.0 * (N - 2) / nn;
  p.p2 = 2.0 / nn;
  return p;
}

inline AsyncScenarioProbs async_scenario_probs(int N) {
  if (N < 6) throw std::invalid_argument("async_scenario_probs: N must be at least 6");
  const double nn = static_cast<double>(N) * (N - 1);
  AsyncScenarioProbs a;
  a.p_dis = static_cast<double>(N - 3) / (N - 1);
  a.p_con = 2.0 / (N - 1);
  a.pd0 = a.p_dis * (static_cast<double>(N - 4) * (N - 5)) / nn;
  a.pd1_1 = a.pd1_2 = a.p_dis * (4.0 * N - 16.0) / nn;
  a.pd2_1 = a.pd2_2 = a.p_dis * 2.0 / nn;
  a.pd2_3 = a.pd2_4 = a.p_dis * 4.0 / nn;
  a.pc0 = a.p_con * (static_cast<double>(N - 3) * (N - 4)) / nn;
  a.pc1_1 = a.pc1_2 = a.pc1_3 = a.p_con * (2.0 * N - 6.0) / nn;
  a.pc2_1 = a.pc2_2 = a.pc2_3 = a.p_con * 2.0 / nn;
  return a;
}

inline KLinkOverlapProbs klink_overlap_probs(int N, int K) {
  if (N < 4) throw std::invalid_argument("klink_overlap_probs: N must be at least 4");
  if (K < 2) throw std::invalid_argument("klink_overlap_probs: K must be at least 2");
  const OverlapProbs p = overlap_probs(N);
  // A given chip of link 1 avoids one interferer's pattern with probability
  // p0 + p1/2 = (N-2)/N; both chips avoid it with probability p0.
  KLinkOverlapProbs r;
  double miss_both = 1.0;
  double miss_one = 1.0;
  for (int k = 1; k < K; ++k) {
    miss_both *= p.p0;
    miss_one *= p.p0 + 0.5 * p.p1;
  }
  r.rho0 = miss_both;
  r.rho1 = 2.0 * (miss_one - miss_both);
  r.rho2 = 1.0 - r.rho0 - r.rho1;
  return r;
}

// Probability that exactly one of link 1's chips is overlapped, by exactly
// one interfering link: the dominant error scenario for large N.
inline double dominant_single_overlap_prob(int N, int K) {
  if (N < 4) throw std::invalid_argument("dominant_single_overlap_prob: N must be at least 4");
  if (K < 2) throw std::invalid_argument("dominant_single_overlap_prob: K must be at least 2");
  const OverlapProbs p = overlap_probs(N);
  double p0_rest = 1.0;
  for (int k = 2; k < K; ++k) p0_rest *= p.p0;
  return (K - 1) * p.p1 * p0_rest;
}

}  // namespace backcom
