#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "backcom/rng.hpp"
#include "backcom/thss.hpp"

using namespace backcom;

namespace {

// All N(N-1) ordered distinct chip pairs for exhaustive enumeration.
std::vector<ThssPattern> all_patterns(int N) {
  std::vector<ThssPattern> out;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      if (a != b) out.push_back(ThssPattern{a, b});
  return out;
}

bool contains(const ThssPattern& p, int c) { return p.s0 == c || p.s1 == c; }

// Classifies one asynchronous case into the 14 sub-scenario slots, using the
// chip-boundary geometry: interferer chip t spills into receiver chip t and
// t+1 (mod N), so receiver chip c is touched directly when c is an
// interferer chip and with a shifted segment when c-1 is.
int classify_async_case(int N, const ThssPattern& p1, const ThssPattern& p2) {
  const int c1 = p1.s0;
  const int c2 = p1.s1;
  const bool consecutive =
      (c2 - c1 + N) % N == 1 || (c1 - c2 + N) % N == 1;
  if (!consecutive) {
    int nd = 0, ns = 0;
    bool full = false;
    for (int c : {c1, c2}) {
      const bool d = contains(p2, c);
      const bool s = contains(p2, (c - 1 + N) % N);
      nd += d ? 1 : 0;
      ns += s ? 1 : 0;
      full = full || (d && s);
    }
    const int total = nd + ns;
    if (total == 0) return 0;                    // pd0
    if (total == 1) return nd == 1 ? 1 : 2;      // pd1_1 / pd1_2
    if (full) return 6;                          // pd2_4
    if (nd == 2) return 3;                       // pd2_1
    if (ns == 2) return 4;                       // pd2_2
    return 5;                                    // pd2_3
  }
  const int a = (c2 - c1 + N) % N == 1 ? c1 : c2;
  const bool m1 = contains(p2, (a - 1 + N) % N);
  const bool m2 = contains(p2, a);
  const bool m3 = contains(p2, (a + 1) % N);
  const int count = (m1 ? 1 : 0) + (m2 ? 1 : 0) + (m3 ? 1 : 0);
  if (count == 0) return 7;                      // pc0
  if (count == 1) return m1 ? 8 : (m2 ? 9 : 10); // pc1_1 / pc1_2 / pc1_3
  if (m1 && m2) return 11;                       // pc2_1
  if (m2 && m3) return 12;                       // pc2_2
  return 13;                                     // pc2_3
}

std::array<double, 14> async_fields(const AsyncScenarioProbs& a) {
  return {a.pd0,   a.pd1_1, a.pd1_2, a.pd2_1, a.pd2_2, a.pd2_3, a.pd2_4,
          a.pc0,   a.pc1_1, a.pc1_2, a.pc1_3, a.pc2_1, a.pc2_2, a.pc2_3};
}

}  // namespace

TEST_CASE("transmitted chip selects the pattern position for the bit") {
  const ThssPattern p{3, 7};
  CHECK(transmitted_chip(p, 0).chip == 3);
  CHECK(transmitted_chip(p, 0).bit == 0);
  CHECK(transmitted_chip(p, 1).chip == 7);
  CHECK(transmitted_chip(p, 1).bit == 1);
}

TEST_CASE("classify_overlap counts shared chips regardless of order") {
  CHECK(classify_overlap({1, 5}, {2, 6}) == 0);
  CHECK(classify_overlap({1, 5}, {5, 2}) == 1);
  CHECK(classify_overlap({1, 5}, {5, 1}) == 2);
  CHECK(classify_overlap({1, 5}, {1, 5}) == 2);
}

TEST_CASE("overlap class probabilities match exhaustive enumeration") {
  for (int N = 4; N <= 10; ++N) {
    const auto pats = all_patterns(N);
    long long c0 = 0, c1 = 0, c2 = 0;
    for (const auto& a : pats)
      for (const auto& b : pats) {
        const int k = classify_overlap(a, b);
        (k == 0 ? c0 : k == 1 ? c1 : c2)++;
      }
    const double total = static_cast<double>(pats.size()) * pats.size();
    const OverlapProbs p = overlap_probs(N);
    CHECK_THAT(p.p0, Catch::Matchers::WithinRel(c0 / total, 1e-13));
    CHECK_THAT(p.p1, Catch::Matchers::WithinRel(c1 / total, 1e-13));
    CHECK_THAT(p.p2, Catch::Matchers::WithinRel(c2 / total, 1e-13));
  }
}

TEST_CASE("overlap class probabilities sum to one") {
  for (int N : {4, 5, 7, 10, 100, 1000, 4000, 1000000, 10000000}) {
    const OverlapProbs p = overlap_probs(N);
    CHECK_THAT(p.p0 + p.p1 + p.p2, Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK(p.p0 >= 0.0);
    CHECK(p.p1 > 0.0);
    CHECK(p.p2 > 0.0);
  }
}

TEST_CASE("asynchronous sub-scenario probabilities match enumeration") {
  for (int N = 6; N <= 10; ++N) {
    const auto pats = all_patterns(N);
    std::array<long long, 14> counts{};
    long long dis = 0, con = 0;
    for (const auto& a : pats) {
      const bool consecutive =
          (a.s1 - a.s0 + N) % N == 1 || (a.s0 - a.s1 + N) % N == 1;
      (consecutive ? con : dis) += pats.size();
      for (const auto& b : pats) counts[classify_async_case(N, a, b)]++;
    }
    const double total = static_cast<double>(pats.size()) * pats.size();
    const AsyncScenarioProbs probs = async_scenario_probs(N);
    const auto fields = async_fields(probs);
    for (int i = 0; i < 14; ++i) {
      INFO("N=" << N << " field " << i);
      CHECK_THAT(fields[i], Catch::Matchers::WithinRel(counts[i] / total, 1e-13));
    }
    CHECK_THAT(probs.p_dis, Catch::Matchers::WithinRel(dis / total, 1e-13));
    CHECK_THAT(probs.p_con, Catch::Matchers::WithinRel(con / total, 1e-13));
  }
}

TEST_CASE("asynchronous sub-scenario probabilities sum to one") {
  for (int N : {6, 8, 50, 1000, 1000000}) {
    const auto fields = async_fields(async_scenario_probs(N));
    double sum = 0.0;
    for (double f : fields) sum += f;
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("k-link union overlap matches enumeration over interferer tuples") {
  for (int K : {2, 3, 4}) {
    for (int N : {6, 9}) {
      const auto pats = all_patterns(N);
      // Link 1's pattern can be fixed by symmetry.
      const ThssPattern p1{0, 2};
      std::array<long long, 3> counts{};
      const long long tuples = [&] {
        long long t = 1;
        for (int k = 1; k < K; ++k) t *= static_cast<long long>(pats.size());
        return t;
      }();
      std::vector<int> idx(K - 1, 0);
      for (long long it = 0; it < tuples; ++it) {
        long long rem = it;
        bool cover0 = false, cover1 = false;
        for (int k = 0; k < K - 1; ++k) {
          const auto& q = pats[rem % pats.size()];
          rem /= pats.size();
          cover0 = cover0 || contains(q, p1.s0);
          cover1 = cover1 || contains(q, p1.s1);
        }
        counts[(cover0 ? 1 : 0) + (cover1 ? 1 : 0)]++;
      }
      const double total = static_cast<double>(tuples);
      const KLinkOverlapProbs r = klink_overlap_probs(N, K);
      INFO("K=" << K << " N=" << N);
      CHECK_THAT(r.rho0, Catch::Matchers::WithinRel(counts[0] / total, 1e-12));
      CHECK_THAT(r.rho1, Catch::Matchers::WithinRel(counts[1] / total, 1e-12));
      CHECK_THAT(r.rho2, Catch::Matchers::WithinRel(counts[2] / total, 1e-12));
    }
  }
}

TEST_CASE("k-link overlap reduces to the pairwise classes at K=2") {
  for (int N : {4, 8, 1000}) {
    const OverlapProbs p = overlap_probs(N);
    const KLinkOverlapProbs r = klink_overlap_probs(N, 2);
    CHECK_THAT(r.rho0, Catch::Matchers::WithinAbs(p.p0, 1e-15));
    CHECK_THAT(r.rho1, Catch::Matchers::WithinAbs(p.p1, 1e-15));
    CHECK_THAT(r.rho2, Catch::Matchers::WithinAbs(p.p2, 1e-15));
    CHECK_THAT(r.rho0 + r.rho1 + r.rho2, Catch::Matchers::WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("dominant single-overlap probability matches enumeration") {
  for (int K : {2, 3}) {
    for (int N : {6, 8}) {
      const auto pats = all_patterns(N);
      const ThssPattern p1{0, 2};
      long long hits = 0;
      long long tuples = 1;
      for (int k = 1; k < K; ++k) tuples *= static_cast<long long>(pats.size());
      for (long long it = 0; it < tuples; ++it) {
        long long rem = it;
        int single = 0, other = 0;
        for (int k = 0; k < K - 1; ++k) {
          const auto& q = pats[rem % pats.size()];
          rem /= pats.size();
          const int ov = classify_overlap(p1, q);
          if (ov == 1) ++single;
          if (ov == 2) ++other;
        }
        if (single == 1 && other == 0) {
          // Remaining interferers must not overlap at all.
          long long rem2 = it;
          int zero = 0;
          for (int k = 0; k < K - 1; ++k) {
            const auto& q = pats[rem2 % pats.size()];
            rem2 /= pats.size();
            if (classify_overlap(p1, q) == 0) ++zero;
          }
          if (zero == K - 2) ++hits;
        }
      }
      const double expected = static_cast<double>(hits) / tuples;
      INFO("K=" << K << " N=" << N);
      CHECK_THAT(dominant_single_overlap_prob(N, K),
                 Catch::Matchers::WithinRel(expected, 1e-12));
    }
  }
}

TEST_CASE("generated patterns are uniform over ordered distinct pairs") {
  const int N = 5;
  const int trials = 200000;
  std::array<long long, 25> counts{};
  for (int t = 0; t < trials; ++t) {
    TrialRng rng(9001, static_cast<std::uint64_t>(t));
    const ThssPattern p = generate_pattern(N, rng);
    REQUIRE(p.s0 >= 0);
    REQUIRE(p.s0 < N);
    REQUIRE(p.s1 >= 0);
    REQUIRE(p.s1 < N);
    REQUIRE(p.s0 != p.s1);
    counts[p.s0 * N + p.s1]++;
  }
  const double expected = trials / 20.0;
  const double sigma = std::sqrt(trials * (1.0 / 20.0) * (19.0 / 20.0));
  double chi2 = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const long long c = counts[a * N + b];
      if (a == b) {
        CHECK(c == 0);
        continue;
      }
      CHECK(std::abs(c - expected) < 5.0 * sigma);
      chi2 += (c - expected) * (c - expected) / expected;
    }
  // 19 degrees of freedom; 60 is far out in the tail.
  CHECK(chi2 < 60.0);
}

TEST_CASE("generated pattern marginals are uniform at large N") {
  const int N = 1000;
  const int trials = 100000;
  double sum0 = 0.0, sum1 = 0.0;
  std::array<long long, 10> deciles{};
  for (int t = 0; t < trials; ++t) {
    TrialRng rng(9002, static_cast<std::uint64_t>(t));
    const ThssPattern p = generate_pattern(N, rng);
    sum0 += p.s0;
    sum1 += p.s1;
    deciles[p.s0 / 100]++;
  }
  const double mean_tol = 5.0 * (N / std::sqrt(12.0)) / std::sqrt(trials);
  CHECK(std::abs(sum0 / trials - 499.5) < mean_tol);
  CHECK(std::abs(sum1 / trials - 499.5) < mean_tol);
  const double dec_exp = trials / 10.0;
  const double dec_sigma = std::sqrt(trials * 0.1 * 0.9);
  for (long long d : deciles) CHECK(std::abs(d - dec_exp) < 5.0 * dec_sigma);
}

TEST_CASE("monte carlo pattern pairs reproduce the overlap classes") {
  const int N = 8;
  const int trials = 200000;
  std::array<long long, 3> counts{};
  for (int t = 0; t < trials; ++t) {
    TrialRng rng(9003, static_cast<std::uint64_t>(t));
    const ThssPattern a = generate_pattern(N, rng);
    const ThssPattern b = generate_pattern(N, rng);
    counts[classify_overlap(a, b)]++;
  }
  const OverlapProbs p = overlap_probs(N);
  const std::array<double, 3> probs{p.p0, p.p1, p.p2};
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(trials * probs[k] * (1.0 - probs[k]));
    CHECK(std::abs(counts[k] - trials * probs[k]) < 4.0 * sigma);
  }
}

TEST_CASE("pattern and probability functions reject invalid sizes") {
  TrialRng rng(1, 1);
  CHECK_THROWS_AS(generate_pattern(3, rng), std::invalid_argument);
  CHECK_THROWS_AS(overlap_probs(3), std::invalid_argument);
  CHECK_THROWS_AS(async_scenario_probs(5), std::invalid_argument);
  CHECK_THROWS_AS(klink_overlap_probs(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(klink_overlap_probs(8, 1), std::invalid_argument);
  CHECK_THROWS_AS(dominant_single_overlap_prob(8, 1), std::invalid_argument);
}
