#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cfsec/channel.hpp"
#include "cfsec/core.hpp"
#include "cfsec/network.hpp"

namespace cfsec {

/// Noise-normalized transmit powers: p is M x K (data), p_v has length M (AN).
struct PowerAllocation {
  Matrix p;
  Vector p_v;

  static PowerAllocation zeros(Eigen::Index aps, Eigen::Index users) {
    return {Matrix::Zero(aps, users), Vector::Zero(aps)};
  }
};

inline void check_allocation_shape(const PowerAllocation& alloc, const ChannelStats& stats) {
  if (alloc.p.rows() != stats.gamma.rows() || alloc.p.cols() != stats.gamma.cols() ||
      alloc.p_v.size() != stats.gamma.rows())
    throw ConfigError("power allocation dimensions do not match the network");
  if ((alloc.p.array() < 0.0).any() || (alloc.p_v.array() < 0.0).any())
    throw DomainError("transmit powers must be non-negative");
}

/// Per-AP budget slack p_t - (sum_k p_mk gamma_mk + p_mv); negative means violated.
inline Vector power_slack(const PowerAllocation& alloc, const ChannelStats& stats, double p_t) {
  return Vector::Constant(alloc.p_v.size(), p_t) - (alloc.p.cwiseProduct(stats.gamma).rowwise().sum() + alloc.p_v);
}

/// Random point of the feasible set: per AP, uniform split weights over the K
/// data streams and the AN stream, scaled by a uniform budget fraction.
inline PowerAllocation random_feasible_allocation(const ChannelStats& stats, double p_t, Rng& rng,
                                                  bool with_an = true) {
  if (!(p_t > 0.0)) throw ConfigError("power budget must be positive");
  if ((stats.gamma.array() <= 0.0).any()) throw DomainError("random_feasible_allocation needs gamma > 0");
  const Eigen::Index M = stats.gamma.rows();
  const Eigen::Index K = stats.gamma.cols();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PowerAllocation a = PowerAllocation::zeros(M, K);
  for (Eigen::Index m = 0; m < M; ++m) {
    Vector w(K + 1);
    for (Eigen::Index i = 0; i <= K; ++i) w(i) = unif(rng);
    if (!with_an) w(K) = 0.0;
    const double scale = unif(rng) / w.sum();
    for (Eigen::Index k = 0; k < K; ++k) a.p(m, k) = p_t * scale * w(k) / stats.gamma(m, k);
    a.p_v(m) = p_t * scale * w(K);
  }
  return a;
}

/// Terms of the closed-form SINRs. ui(k, k') is the interference that user
/// k' causes at user k; in(k) and in_eve(j, k) are the full SINR denominators.
struct SinrDecomposition {
  Vector ds;
  Vector bu;
  Matrix ui;
  Vector an;
  Matrix ls;
  Vector an_eve;
  Vector in;
  Matrix in_eve;

  double sinr(Eigen::Index k) const { return ds(k) / in(k); }
  double sinr_eve(Eigen::Index j, Eigen::Index k) const { return ls(j, k) / in_eve(j, k); }
};

inline SinrDecomposition sinr_terms(const PowerAllocation& alloc, const ChannelStats& stats,
                                    const NetworkRealization& net) {
  check_allocation_shape(alloc, stats);
  const Eigen::Index K = alloc.p.cols();
  const Eigen::Index J = net.beta_eve.cols();
  const Matrix pg = alloc.p.cwiseProduct(stats.gamma);

  SinrDecomposition t;
  t.ds = (alloc.p.cwiseSqrt().cwiseProduct(stats.gamma)).colwise().sum().transpose().array().square();
  t.bu = pg.cwiseProduct(net.beta).colwise().sum().transpose();
  t.ui = net.beta.transpose() * pg;  // (k, k') = sum_m beta_mk p_mk' gamma_mk'
  t.an = net.beta.transpose() * alloc.p_v;
  t.ls = net.beta_eve.transpose() * pg;  // (j, k) = sum_m beta^e_mj p_mk gamma_mk
  t.an_eve = net.beta_eve.transpose() * alloc.p_v;

  t.in.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) t.in(k) = t.bu(k) + (t.ui.row(k).sum() - t.ui(k, k)) + t.an(k) + 1.0;
  t.in_eve.resize(J, K);
  for (Eigen::Index j = 0; j < J; ++j) {
    const double total = t.ls.row(j).sum();
    for (Eigen::Index k = 0; k < K; ++k) t.in_eve(j, k) = (total - t.ls(j, k)) + t.an_eve(j) + 1.0;
  }
  return t;
}

/// Use-and-then-forget lower bound on each user's rate, bits per channel use.
inline Vector user_rate_bound(const PowerAllocation& alloc, const ChannelStats& stats,
                              const NetworkRealization& net) {
  const auto t = sinr_terms(alloc, stats, net);
  Vector r(t.ds.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) r(k) = log2p1(t.sinr(k));
  return r;
}

/// Worst-case (Eve knows her channel) leakage bound, J x K.
inline Matrix leakage_rate_bound(const PowerAllocation& alloc, const ChannelStats& stats,
                                 const NetworkRealization& net) {
  const auto t = sinr_terms(alloc, stats, net);
  Matrix r(t.ls.rows(), t.ls.cols());
  for (Eigen::Index j = 0; j < r.rows(); ++j)
    for (Eigen::Index k = 0; k < r.cols(); ++k) r(j, k) = log2p1(t.sinr_eve(j, k));
  return r;
}

struct RateReport {
  Vector user_rate;
  Matrix leakage;
  Matrix secrecy;  // clamped at zero
  Matrix gap;      // raw user_rate - leakage
  double min_secrecy = 0.0;
  double min_gap = 0.0;  // unclamped objective; equals min user rate when J = 0
  double min_user_rate = 0.0;
};

inline RateReport secrecy_report(const PowerAllocation& alloc, const ChannelStats& stats,
                                 const NetworkRealization& net) {
  RateReport rep;
  rep.user_rate = user_rate_bound(alloc, stats, net);
  rep.leakage = leakage_rate_bound(alloc, stats, net);
  const Eigen::Index J = rep.leakage.rows();
  const Eigen::Index K = rep.user_rate.size();
  rep.gap.resize(J, K);
  for (Eigen::Index j = 0; j < J; ++j) rep.gap.row(j) = rep.user_rate.transpose() - rep.leakage.row(j);
  rep.secrecy = rep.gap.cwiseMax(0.0);
  rep.min_user_rate = rep.user_rate.minCoeff();
  if (J == 0) {
    rep.min_gap = rep.min_user_rate;
    rep.min_secrecy = rep.min_user_rate;
  } else {
    rep.min_gap = rep.gap.minCoeff();
    rep.min_secrecy = rep.secrecy.minCoeff();
  }
  return rep;
}

}  // namespace cfsec
