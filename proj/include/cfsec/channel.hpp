#pragma once

#include <cmath>

#include "cfsec/core.hpp"
#include "cfsec/network.hpp"

namespace cfsec {

/// Uplink training. p_p is noise-normalized; tau_p >= K so that every user
/// gets its own canonical orthonormal pilot.
struct PilotConfig {
  int tau_p = 2;
  double p_p = 1.0;
};

/// Per-link LMMSE statistics: c is the estimator gain, gamma = E[|g_hat|^2].
struct ChannelStats {
  Matrix c;
  Matrix gamma;
};

inline ChannelStats lmmse_stats(const Matrix& beta, const PilotConfig& pilots) {
  if (pilots.tau_p < beta.cols())
    throw ConfigError("tau_p must be at least the number of users");
  if (!(pilots.p_p > 0.0)) throw ConfigError("pilot power must be positive");
  if ((beta.array() < 0.0).any()) throw DomainError("large-scale gains must be non-negative");

  const double snr = pilots.tau_p * pilots.p_p;
  const double root = std::sqrt(snr);
  ChannelStats out;
  out.c.resize(beta.rows(), beta.cols());
  out.gamma.resize(beta.rows(), beta.cols());
  for (Eigen::Index m = 0; m < beta.rows(); ++m) {
    // The denominator sums over all users sharing the AP's pilot block.
    const double denom = snr * beta.row(m).sum() + 1.0;
    for (Eigen::Index k = 0; k < beta.cols(); ++k) {
      out.c(m, k) = root * beta(m, k) / denom;
      out.gamma(m, k) = root * beta(m, k) * out.c(m, k);
    }
  }
  return out;
}

inline ChannelStats lmmse_stats(const NetworkRealization& net, const PilotConfig& pilots) {
  return lmmse_stats(net.beta, pilots);
}

/// One small-scale fading draw: g is M x K (users), g_eve is M x J.
struct ChannelDraw {
  CMatrix g;
  CMatrix g_eve;
};

inline CMatrix draw_scaled_gaussian(const Matrix& beta, Rng& rng) {
  CMatrix out(beta.rows(), beta.cols());
  for (Eigen::Index k = 0; k < beta.cols(); ++k)
    for (Eigen::Index m = 0; m < beta.rows(); ++m) out(m, k) = std::sqrt(beta(m, k)) * complex_normal(rng);
  return out;
}

inline ChannelDraw draw_channels(const NetworkRealization& net, Rng& rng) {
  return {draw_scaled_gaussian(net.beta, rng), draw_scaled_gaussian(net.beta_eve, rng)};
}

/// LMMSE estimates from the projected pilot observation
/// y_mk = sqrt(tau_p p_p) g_mk + n_mk. The pilot energy of the other users at
/// AP m enters n_mk as independent noise, n_mk ~ CN(0, tau_p p_p sum_{k' != k} beta_mk' + 1),
/// so that E[|y_mk|^2] equals the estimator's denominator and E[|g_hat|^2] = gamma.
inline CMatrix estimate_channels(const CMatrix& g, const Matrix& beta, const PilotConfig& pilots,
                                 const ChannelStats& stats, Rng& rng) {
  const double snr = pilots.tau_p * pilots.p_p;
  const double root = std::sqrt(snr);
  CMatrix est(g.rows(), g.cols());
  for (Eigen::Index m = 0; m < g.rows(); ++m) {
    const double total = beta.row(m).sum();
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      const double noise_sd = std::sqrt(snr * (total - beta(m, k)) + 1.0);
      est(m, k) = stats.c(m, k) * (root * g(m, k) + noise_sd * complex_normal(rng));
    }
  }
  return est;
}

inline CMatrix estimate_channels(const CMatrix& g, const NetworkRealization& net, const PilotConfig& pilots,
                                 const ChannelStats& stats, Rng& rng) {
  return estimate_channels(g, net.beta, pilots, stats, rng);
}

}  // namespace cfsec
