#pragma once

#include <cmath>

#include "cfsec/channel.hpp"
#include "cfsec/network.hpp"
#include "cfsec/rates.hpp"

namespace cfsec::test {

// 100 mW over -94 dBm noise, pilots at twice that.
inline const double kPt = std::pow(10.0, 11.4);
inline const double kPp = 2.0 * kPt;

inline NetworkRealization make_net(int M, int K, int J, std::uint64_t seed) {
  DeploymentConfig d;
  d.num_aps = M;
  d.num_users = K;
  d.num_eves = J;
  d.seed = seed;
  return deploy(d);
}

inline PilotConfig pilots_for(int K) { return {K, kPp}; }

inline ChannelStats stats_for(const NetworkRealization& net) { return lmmse_stats(net, pilots_for(net.num_users())); }

// Network given directly by its gains; positions are left empty.
inline NetworkRealization manual_net(const Matrix& beta, const Matrix& beta_eve) {
  NetworkRealization net;
  net.beta = beta;
  net.beta_eve = beta_eve;
  return net;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace cfsec::test
