#pragma once

#include <cmath>

#include "cfsec/channel.hpp"
#include "cfsec/rates.hpp"

namespace cfsec {

/// Empirical moments of the effective downlink channels at the users.
///
/// mean_fkk and var_fkk are E[f_kk] and V(f_kk); cross_power(k, k') is
/// E[|f_kk'|^2]; an_power is E[|z_k|^2]. uatf_rate plugs these moments into
/// the use-and-then-forget SINR, so it estimates the closed-form bound itself.
/// ergodic_rate is the genie-aided rate E[log2(1 + SINR_inst)] with the
/// instantaneous AN power conditioned on the channel, together with its
/// standard error; it upper-bounds the use-and-then-forget rate.
struct UserRateMc {
  Eigen::VectorXcd mean_fkk;
  Vector var_fkk;
  Matrix cross_power;
  Vector an_power;
  Vector uatf_rate;
  Vector ergodic_rate;
  Vector ergodic_se;
  int draws = 0;
};

/// Empirical leakage: fe_power(j, k) = E[|f^e_jk|^2], an_power(j) = E[|z^e_j|^2],
/// rate(j, k) = E[log2(1 + SINR^e_jk)] with standard error rate_se.
struct LeakageMc {
  Matrix fe_power;
  Vector an_power;
  Matrix rate;
  Matrix rate_se;
  int draws = 0;
};

namespace detail {

// f(k, k') = sum_m sqrt(p_mk') conj(g_hat_mk') g_mk
inline CMatrix effective_gains(const CMatrix& g, const CMatrix& g_hat, const Matrix& sqrt_p) {
  const CMatrix weighted = g_hat.conjugate().cwiseProduct(sqrt_p.cast<Complex>());
  return g.transpose() * weighted;
}

inline double mean_to_se(double sum, double sum_sq, int n) {
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1, n - 1);
  return std::sqrt(var / n);
}

}  // namespace detail

inline UserRateMc mc_validate_user_rate(const PowerAllocation& alloc, const ChannelStats& stats,
                                        const NetworkRealization& net, const PilotConfig& pilots, int num_draws,
                                        Rng& rng) {
  check_allocation_shape(alloc, stats);
  if (num_draws < 2) throw ConfigError("need at least two Monte-Carlo draws");
  const Eigen::Index M = net.beta.rows();
  const Eigen::Index K = net.beta.cols();
  const Matrix sqrt_p = alloc.p.cwiseSqrt();
  const Vector sqrt_pv = alloc.p_v.cwiseSqrt();

  Eigen::VectorXcd sum_f = Eigen::VectorXcd::Zero(K);
  Matrix sum_abs2 = Matrix::Zero(K, K);
  Vector sum_z = Vector::Zero(K);
  Vector sum_rate = Vector::Zero(K);
  Vector sum_rate_sq = Vector::Zero(K);

  for (int n = 0; n < num_draws; ++n) {
    const CMatrix g = draw_scaled_gaussian(net.beta, rng);
    const CMatrix g_hat = estimate_channels(g, net.beta, pilots, stats, rng);
    Eigen::VectorXcd v(M);
    for (Eigen::Index m = 0; m < M; ++m) v(m) = complex_normal(rng);

    const CMatrix f = detail::effective_gains(g, g_hat, sqrt_p);
    const Matrix f_abs2 = f.cwiseAbs2();
    sum_abs2 += f_abs2;
    for (Eigen::Index k = 0; k < K; ++k) {
      sum_f(k) += f(k, k);
      Complex z{0.0, 0.0};
      double an_inst = 0.0;
      for (Eigen::Index m = 0; m < M; ++m) {
        z += sqrt_pv(m) * g(m, k) * v(m);
        an_inst += alloc.p_v(m) * std::norm(g(m, k));
      }
      sum_z(k) += std::norm(z);
      const double interference = f_abs2.row(k).sum() - f_abs2(k, k);
      const double r = log2p1(f_abs2(k, k) / (interference + an_inst + 1.0));
      sum_rate(k) += r;
      sum_rate_sq(k) += r * r;
    }
  }

  UserRateMc out;
  out.draws = num_draws;
  out.mean_fkk = sum_f / static_cast<double>(num_draws);
  out.cross_power = sum_abs2 / static_cast<double>(num_draws);
  out.an_power = sum_z / static_cast<double>(num_draws);
  out.var_fkk.resize(K);
  out.uatf_rate.resize(K);
  out.ergodic_rate.resize(K);
  out.ergodic_se.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    out.var_fkk(k) = std::max(0.0, out.cross_power(k, k) - std::norm(out.mean_fkk(k)));
    const double interference = out.cross_power.row(k).sum() - out.cross_power(k, k);
    out.uatf_rate(k) = log2p1(std::norm(out.mean_fkk(k)) / (out.var_fkk(k) + interference + out.an_power(k) + 1.0));
    out.ergodic_rate(k) = sum_rate(k) / num_draws;
    out.ergodic_se(k) = detail::mean_to_se(sum_rate(k), sum_rate_sq(k), num_draws);
  }
  return out;
}

/// Eve-side Monte Carlo over joint channel/estimate draws. The AN power seen by
/// Eve j is conditioned on the channel: |z^e_j|^2 -> sum_m p_mv |g^e_mj|^2.
inline LeakageMc mc_validate_leakage(const PowerAllocation& alloc, const ChannelStats& stats,
                                     const NetworkRealization& net, const PilotConfig& pilots, int num_draws,
                                     Rng& rng) {
  check_allocation_shape(alloc, stats);
  if (num_draws < 2) throw ConfigError("need at least two Monte-Carlo draws");
  const Eigen::Index M = net.beta.rows();
  const Eigen::Index K = net.beta.cols();
  const Eigen::Index J = net.beta_eve.cols();

  LeakageMc out;
  out.draws = num_draws;
  out.fe_power = Matrix::Zero(J, K);
  out.an_power = Vector::Zero(J);
  out.rate = Matrix::Zero(J, K);
  out.rate_se = Matrix::Zero(J, K);
  if (J == 0) return out;

  const Matrix sqrt_p = alloc.p.cwiseSqrt();
  Matrix sum_sq = Matrix::Zero(J, K);
  for (int n = 0; n < num_draws; ++n) {
    const CMatrix g = draw_scaled_gaussian(net.beta, rng);
    const CMatrix g_eve = draw_scaled_gaussian(net.beta_eve, rng);
    const CMatrix g_hat = estimate_channels(g, net.beta, pilots, stats, rng);
    const Matrix fe_abs2 = detail::effective_gains(g_eve, g_hat, sqrt_p).cwiseAbs2();  // J x K
    out.fe_power += fe_abs2;
    for (Eigen::Index j = 0; j < J; ++j) {
      double an_inst = 0.0;
      for (Eigen::Index m = 0; m < M; ++m) an_inst += alloc.p_v(m) * std::norm(g_eve(m, j));
      out.an_power(j) += an_inst;
      const double total = fe_abs2.row(j).sum();
      for (Eigen::Index k = 0; k < K; ++k) {
        const double r = log2p1(fe_abs2(j, k) / (total - fe_abs2(j, k) + an_inst + 1.0));
        out.rate(j, k) += r;
        sum_sq(j, k) += r * r;
      }
    }
  }
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index k = 0; k < K; ++k) out.rate_se(j, k) = detail::mean_to_se(out.rate(j, k), sum_sq(j, k), num_draws);
  out.fe_power /= num_draws;
  out.an_power /= num_draws;
  out.rate /= num_draws;
  return out;
}

}  // namespace cfsec
