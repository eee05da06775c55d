#pragma once

// Network geometry, path loss, and channel generation. Distances and system
// constants live in SystemConfig; ChannelRealization holds one block-fading
// draw of every reader-tag, tag-tag, and reader-reader coefficient.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "backcom/rng.hpp"

namespace backcom {

using cplx = std::complex<double>;

enum class ChannelModel { static_coeffs, rayleigh };
enum class PowerMode { fcp, fce };

// Dense square matrix with 0-based indices; entry (m, n) corresponds to the
// one-based link subscript (m+1, n+1).
template <class T>
class SquareMat {
 public:
  SquareMat() = default;
  explicit SquareMat(int n, T fill = T{}) : n_(n), v_(static_cast<std::size_t>(n) * n, fill) {}
  int size() const { return n_; }
  T& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * n_ + c]; }
  const T& operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * n_ + c]; }

 private:
  int n_ = 0;
  std::vector<T> v_;
};

// One block-fading draw. f(m,n): reader m -> tag n; g(m,n): tag m -> tag n;
// h(m,n): reader m -> reader n. Backward coefficients are never stored:
// tag n -> reader m is conj(f(m,n)) by channel reciprocity.
struct ChannelRealization {
  SquareMat<cplx> f;
  SquareMat<cplx> g;
  SquareMat<cplx> h;
};

struct SystemConfig {
  int K = 2;                     // number of reader-tag links
  int N = 1000;                  // chips per symbol
  double T = 1.0;                // symbol duration, s
  double P = 0.05;               // reader transmit power, W
  double rho = 0.5;              // reflection coefficient
  double eta = 0.5;              // harvesting efficiency
  double sigma2_reader = 1e-13;  // complex noise variance at the reader, W
  double sigma2_tag = 1e-13;     // per-component noise variance at the tag, W
  double lambda = 2.5;           // path-loss exponent
  double E0 = 1e-8;              // per-symbol energy requirement, J
  double beta = 0.0;             // link-2 delay offset, fraction of a chip
  ChannelModel channel_model = ChannelModel::rayleigh;
  PowerMode power_mode = PowerMode::fcp;
  // When set, the tag backscatters on the on-chips it detected rather than
  // the ones actually transmitted (quantifies the detection-coupling gap).
  bool couple_tag_detection = false;
  SquareMat<double> d_reader_tag;      // (m,n): reader m to tag n, m
  SquareMat<double> d_tag_tag;         // (m,n): tag m to tag n, m
  SquareMat<double> d_reader_reader;   // (m,n): reader m to reader n, m
  std::optional<ChannelRealization> static_coeffs;
};

// Large-scale power gain d^{-lambda}.
inline double path_loss_variance(double d, double lambda) {
  if (!(d > 0.0)) throw std::domain_error("path_loss_variance: distance must be positive");
  return std::pow(d, -lambda);
}

// Reference geometry: co-located pairs 10 m apart, every cross link 22 m,
// tags (and readers) 20 m from one another.
inline SystemConfig default_config(int K = 2) {
  SystemConfig cfg;
  cfg.K = K;
  cfg.d_reader_tag = SquareMat<double>(K, 22.0);
  cfg.d_tag_tag = SquareMat<double>(K, 20.0);
  cfg.d_reader_reader = SquareMat<double>(K, 20.0);
  for (int i = 0; i < K; ++i) {
    cfg.d_reader_tag(i, i) = 10.0;
    cfg.d_tag_tag(i, i) = 0.0;
    cfg.d_reader_reader(i, i) = 0.0;
  }
  return cfg;
}

inline void validate(const SystemConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (cfg.K < 2) fail("K must be at least 2");
  if (cfg.N < 4) fail("N must be at least 4");
  if (cfg.beta != 0.0 && cfg.N < 6) fail("N must be at least 6 when beta > 0");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) fail("beta must lie in [0,1)");
  if (!(cfg.T > 0.0)) fail("T must be positive");
  if (!(cfg.P > 0.0)) fail("P must be positive");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail("rho must lie in (0,1)");
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) fail("eta must lie in (0,1]");
  if (!(cfg.sigma2_reader >= 0.0)) fail("sigma2_reader must be non-negative");
  if (!(cfg.sigma2_tag >= 0.0)) fail("sigma2_tag must be non-negative");
  if (!(cfg.lambda > 0.0)) fail("lambda must be positive");
  if (!(cfg.E0 >= 0.0)) fail("E0 must be non-negative");
  if (cfg.d_reader_tag.size() != cfg.K || cfg.d_tag_tag.size() != cfg.K ||
      cfg.d_reader_reader.size() != cfg.K) {
    fail("distance matrices must be K x K");
  }
  for (int m = 0; m < cfg.K; ++m) {
    for (int n = 0; n < cfg.K; ++n) {
      if (!(cfg.d_reader_tag(m, n) > 0.0)) fail("reader-tag distances must be positive");
      if (m != n && !(cfg.d_tag_tag(m, n) > 0.0)) fail("tag-tag distances must be positive");
      if (m != n && !(cfg.d_reader_reader(m, n) > 0.0)) fail("reader-reader distances must be positive");
    }
  }
  if (cfg.channel_model == ChannelModel::static_coeffs) {
    if (!cfg.static_coeffs) fail("static channel model requires static_channels coefficients");
    if (cfg.static_coeffs->f.size() != cfg.K || cfg.static_coeffs->g.size() != cfg.K ||
        cfg.static_coeffs->h.size() != cfg.K) {
      fail("static coefficient matrices must be K x K");
    }
  }
}

namespace detail {

inline cplx draw_cn(TrialRng& rng, double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = rng.next_normal();
  const double im = rng.next_normal();
  return cplx(s * re, s * im);
}

}  // namespace detail

// Draws one block-fading realization (or returns the configured static set).
// Rayleigh coefficients are circularly-symmetric complex Gaussian with power
// d^{-lambda} for the node pair; self entries of g and h are zero (a node
// does not interfere with itself). Draw order is fixed (f, g, h, row-major)
// so identical rng streams give identical realizations. The in-place overload
// reuses the output's storage so per-trial sampling performs no allocations.
inline void sample_channels(const SystemConfig& cfg, TrialRng& rng, ChannelRealization& out) {
  if (cfg.channel_model == ChannelModel::static_coeffs) {
    if (!cfg.static_coeffs) {
      throw std::invalid_argument("sample_channels: static model without coefficients");
    }
    out.f = cfg.static_coeffs->f;
    out.g = cfg.static_coeffs->g;
    out.h = cfg.static_coeffs->h;
    return;
  }
  if (out.f.size() != cfg.K) out.f = SquareMat<cplx>(cfg.K);
  if (out.g.size() != cfg.K) out.g = SquareMat<cplx>(cfg.K);
  if (out.h.size() != cfg.K) out.h = SquareMat<cplx>(cfg.K);
  for (int m = 0; m < cfg.K; ++m) {
    for (int n = 0; n < cfg.K; ++n) {
      out.f(m, n) = detail::draw_cn(rng, path_loss_variance(cfg.d_reader_tag(m, n), cfg.lambda));
    }
  }
  for (int m = 0; m < cfg.K; ++m) {
    for (int n = 0; n < cfg.K; ++n) {
      out.g(m, n) = (m == n) ? cplx(0.0, 0.0)
                             : detail::draw_cn(rng, path_loss_variance(cfg.d_tag_tag(m, n), cfg.lambda));
    }
  }
  for (int m = 0; m < cfg.K; ++m) {
    for (int n = 0; n < cfg.K; ++n) {
      out.h(m, n) = (m == n) ? cplx(0.0, 0.0)
                             : detail::draw_cn(rng, path_loss_variance(cfg.d_reader_reader(m, n), cfg.lambda));
    }
  }
}

inline ChannelRealization sample_channels(const SystemConfig& cfg, TrialRng& rng) {
  ChannelRealization ch;
  sample_channels(cfg, rng, ch);
  return ch;
}

// Stable identifier of everything that affects simulation results, for
// embedding in reports (FNV-1a over the numeric fields).
inline std::uint64_t config_digest(const SystemConfig& cfg) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix_bytes = [&hash](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= b[i];
      hash *= 1099511628211ull;
    }
  };
  auto mix_d = [&](double x) { mix_bytes(&x, sizeof(x)); };
  auto mix_i = [&](std::int64_t x) { mix_bytes(&x, sizeof(x)); };
  mix_i(cfg.K);
  mix_i(cfg.N);
  mix_d(cfg.T);
  mix_d(cfg.P);
  mix_d(cfg.rho);
  mix_d(cfg.eta);
  mix_d(cfg.sigma2_reader);
  mix_d(cfg.sigma2_tag);
  mix_d(cfg.lambda);
  mix_d(cfg.E0);
  mix_d(cfg.beta);
  mix_i(static_cast<std::int64_t>(cfg.channel_model));
  mix_i(static_cast<std::int64_t>(cfg.power_mode));
  mix_i(cfg.couple_tag_detection ? 1 : 0);
  for (int m = 0; m < cfg.K; ++m) {
    for (int n = 0; n < cfg.K; ++n) {
      mix_d(cfg.d_reader_tag(m, n));
      mix_d(cfg.d_tag_tag(m, n));
      mix_d(cfg.d_reader_reader(m, n));
    }
  }
  if (cfg.static_coeffs) {
    for (int m = 0; m < cfg.K; ++m) {
      for (int n = 0; n < cfg.K; ++n) {
        mix_d(cfg.static_coeffs->f(m, n).real());
        mix_d(cfg.static_coeffs->f(m, n).imag());
        mix_d(cfg.static_coeffs->g(m, n).real());
        mix_d(cfg.static_coeffs->g(m, n).imag());
        mix_d(cfg.static_coeffs->h(m, n).real());
        mix_d(cfg.static_coeffs->h(m, n).imag());
      }
    }
  }
  return hash;
}

}  // namespace backcom
