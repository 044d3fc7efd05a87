#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cfsec/core.hpp"
#include "cfsec/rates.hpp"

namespace cfsec {

/// Surrogate of the leakage bound around an expansion point.
///
/// taylor: first-order expansion R0 + slope (LS/LS0 - IN/IN0), affine.
/// convex_bound: R^e = log2(LS + IN) - log2(IN) with the concave first term
/// replaced by its tangent; an upper bound on R^e with the same value and
/// gradient at the expansion point.
enum class LeakageModel { convex_bound, taylor };

struct ScaConfig {
  double epsilon = 0.01;   // stop when |t[n] - t[n-1]| <= epsilon (bits)
  int max_iters = 50;
  double solver_tol = 1e-8;  // duality-gap target of each conic solve (bits)
  bool enable_an = true;
  LeakageModel leakage_model = LeakageModel::convex_bound;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
  }
};

/// Budget-relative coordinates used inside the solver:
/// q_mk = p_mk gamma_mk / p_t, qv_m = p_mv / p_t, u_mk stands for sqrt(q_mk).
/// The per-AP budget becomes sum_k q_mk + qv_m <= 1.
struct ScaledPoint {
  Matrix q;
  Matrix u;
  Vector qv;
};

inline ScaledPoint to_scaled(const PowerAllocation& alloc, const ChannelStats& stats, double p_t) {
  ScaledPoint x;
  x.q = alloc.p.cwiseProduct(stats.gamma) / p_t;
  x.u = x.q.cwiseSqrt();
  x.qv = alloc.p_v / p_t;
  return x;
}

inline PowerAllocation from_scaled(const ScaledPoint& x, const ChannelStats& stats, double p_t) {
  PowerAllocation alloc;
  alloc.p.resize(x.q.rows(), x.q.cols());
  for (Eigen::Index m = 0; m < x.q.rows(); ++m)
    for (Eigen::Index k = 0; k < x.q.cols(); ++k)
      alloc.p(m, k) = stats.gamma(m, k) > 0.0 ? std::max(0.0, x.q(m, k)) * p_t / stats.gamma(m, k) : 0.0;
  alloc.p_v = x.qv.cwiseMax(0.0) * p_t;
  return alloc;
}

/// constant + <coef_q, q> + <coef_u, u> + <coef_qv, qv>
struct AffineForm {
  double constant = 0.0;
  Matrix coef_q;
  Matrix coef_u;
  Vector coef_qv;

  static AffineForm zero(Eigen::Index aps, Eigen::Index users) {
    return {0.0, Matrix::Zero(aps, users), Matrix::Zero(aps, users), Vector::Zero(aps)};
  }

  double operator()(const ScaledPoint& x) const {
    return constant + coef_q.cwiseProduct(x.q).sum() + coef_u.cwiseProduct(x.u).sum() + coef_qv.dot(x.qv);
  }

  AffineForm operator-() const { return {-constant, -coef_q, -coef_u, -coef_qv}; }
};

/// form(x) - quad_weight * quad_arg(x)^2 + log_weight * ln(log_arg(x)).
/// Concave whenever quad_weight >= 0 and log_weight >= 0.
struct SurrogateExpr {
  AffineForm form;
  double quad_weight = 0.0;
  AffineForm quad_arg;
  double log_weight = 0.0;
  AffineForm log_arg;

  double operator()(const ScaledPoint& x) const {
    double v = form(x);
    if (quad_weight != 0.0) {
      const double a = quad_arg(x);
      v -= quad_weight * a * a;
    }
    if (log_weight != 0.0) v += log_weight * std::log(log_arg(x));
    return v;
  }

  SurrogateExpr operator-() const { return {-form, -quad_weight, quad_arg, -log_weight, log_arg}; }
};

namespace detail {
inline ScaledPoint scaled_at(const PowerAllocation& alloc, const Matrix& gamma, double p_t) {
  ScaledPoint x;
  x.q = alloc.p.cwiseProduct(gamma) / p_t;
  x.u = x.q.cwiseSqrt();
  x.qv = alloc.p_v / p_t;
  return x;
}
}  // namespace detail

/// Concave minorant of the user-rate bound around an expansion point (DS0, IN0):
///
///   R_k >= R0 + slope * (2 sqrt(DS)/sqrt(DS0) - IN/IN0 - 1 - (sqrt(DS) - sqrt(DS0))^2 / IN0),
///   slope = SINR0 / ((1 + SINR0) ln 2).
///
/// This is the tangent plane of the jointly convex log(1 + x^2/y) written in
/// (x, x^2 + y), so it holds for every x >= 0, y > 0 and is tight at the
/// expansion point. In scaled coordinates sqrt(DS_k) = sum_m sqrt(p_t gamma_mk) u_mk
/// and IN_k is affine; the squared term is the only non-affine part.
struct UserRateLinearization {
  SurrogateExpr expr;
  bool degenerate = false;  // zero signal at the expansion point; surrogate is the constant 0
  double p_t = 1.0;
  Matrix gamma;

  double evaluate(const PowerAllocation& alloc) const { return expr(detail::scaled_at(alloc, gamma, p_t)); }
};

inline UserRateLinearization linearize_user_rate(const PowerAllocation& at, const ChannelStats& stats,
                                                 const NetworkRealization& net, double p_t, Eigen::Index k) {
  const Eigen::Index M = net.beta.rows();
  const Eigen::Index K = net.beta.cols();
  const auto terms = sinr_terms(at, stats, net);

  UserRateLinearization lin;
  lin.expr.form = AffineForm::zero(M, K);
  lin.p_t = p_t;
  lin.gamma = stats.gamma;
  const double ds = terms.ds(k);
  const double in = terms.in(k);
  if (!(ds > 0.0)) {
    lin.degenerate = true;
    return lin;
  }
  const double sinr = ds / in;
  const double slope = sinr / ((1.0 + sinr) * std::log(2.0));
  const double root_ds = std::sqrt(ds);

  // IN = 1 + p_t sum_m beta_mk (sum_k' q_mk' + qv_m)
  auto& f = lin.expr.form;
  f.constant = log2p1(sinr) - slope * (1.0 + 1.0 / in);
  lin.expr.quad_arg = AffineForm::zero(M, K);
  lin.expr.quad_arg.constant = -root_ds;
  lin.expr.quad_weight = slope / in;
  for (Eigen::Index m = 0; m < M; ++m) {
    const double a = std::sqrt(p_t * stats.gamma(m, k));
    f.coef_u(m, k) = 2.0 * slope * a / root_ds;
    lin.expr.quad_arg.coef_u(m, k) = a;
    const double w = -slope * p_t * net.beta(m, k) / in;
    f.coef_q.row(m).setConstant(w);
    f.coef_qv(m) = w;
  }
  return lin;
}

struct LeakageLinearization {
  SurrogateExpr expr;
  bool degenerate = false;  // taylor only: no leakage signal at the expansion point
  double p_t = 1.0;
  Matrix gamma;

  double evaluate(const PowerAllocation& alloc) const { return expr(detail::scaled_at(alloc, gamma, p_t)); }

  // Gradient with respect to the physical powers (p, p_v) at alloc.
  PowerAllocation gradient(const PowerAllocation& alloc) const {
    Matrix gq = expr.form.coef_q;
    Vector gv = expr.form.coef_qv;
    if (expr.log_weight != 0.0) {
      const double arg = expr.log_arg(detail::scaled_at(alloc, gamma, p_t));
      gq += expr.log_weight / arg * expr.log_arg.coef_q;
      gv += expr.log_weight / arg * expr.log_arg.coef_qv;
    }
    return {gq.cwiseProduct(gamma) / p_t, gv / p_t};
  }
};

inline LeakageLinearization linearize_leakage_rate(const PowerAllocation& at, const ChannelStats& stats,
                                                   const NetworkRealization& net, double p_t, Eigen::Index j,
                                                   Eigen::Index k, LeakageModel model = LeakageModel::taylor) {
  const Eigen::Index M = net.beta.rows();
  const Eigen::Index K = net.beta.cols();
  const auto terms = sinr_terms(at, stats, net);

  LeakageLinearization lin;
  lin.expr.form = AffineForm::zero(M, K);
  lin.p_t = p_t;
  lin.gamma = stats.gamma;
  const double ls = terms.ls(j, k);
  const double in = terms.in_eve(j, k);
  const double ln2 = std::log(2.0);

  if (model == LeakageModel::convex_bound) {
    // log2(X0) + (X - X0)/(X0 ln2) - log2(IN), X = LS + IN = 1 + p_t sum_m beta^e_mj (sum_k' q_mk' + qv_m)
    const double total = ls + in;
    auto& f = lin.expr.form;
    f.constant = std::log2(total) - 1.0 / ln2 + 1.0 / (total * ln2);
    lin.expr.log_weight = -1.0 / ln2;
    lin.expr.log_arg = AffineForm::zero(M, K);
    lin.expr.log_arg.constant = 1.0;
    for (Eigen::Index m = 0; m < M; ++m) {
      const double b = p_t * net.beta_eve(m, j);
      f.coef_q.row(m).setConstant(b / (total * ln2));
      f.coef_qv(m) = b / (total * ln2);
      lin.expr.log_arg.coef_q.row(m).setConstant(b);
      lin.expr.log_arg.coef_q(m, k) = 0.0;
      lin.expr.log_arg.coef_qv(m) = b;
    }
    return lin;
  }

  if (!(ls > 0.0)) {
    lin.degenerate = true;
    return lin;
  }
  const double sinr = ls / in;
  const double slope = sinr / ((1.0 + sinr) * ln2);

  // LS = p_t sum_m beta^e_mj q_mk, IN = 1 + p_t sum_m beta^e_mj (sum_{k' != k} q_mk' + qv_m)
  auto& f = lin.expr.form;
  f.constant = log2p1(sinr) - slope / in;
  for (Eigen::Index m = 0; m < M; ++m) {
    const double b = p_t * net.beta_eve(m, j);
    f.coef_q.row(m).setConstant(-slope * b / in);
    f.coef_q(m, k) = slope * b / ls;
    f.coef_qv(m) = -slope * b / in;
  }
  return lin;
}

/// One coupling constraint: expr(x) + sum_i coef_i * tail[index_i] >= 0, expr concave.
struct CouplingRow {
  SurrogateExpr expr;
  std::vector<std::pair<int, double>> tail;
};

/// Convex subproblem of one SCA step, in scaled coordinates.
///
/// Variables: q (MK), u (MK), qv (M), omega (JK, tail index j*K + k), t (last tail entry).
/// Objective: maximize t.
/// Coupling rows (concave, >= 0): JK user-rate rows  user_k - omega_jk - t and
/// JK leakage rows omega_jk - leak_jk. With J = 0 there are K rows user_k - t.
/// Per-AP constraints: sum_k q_mk + qv_m <= 1, q >= 0, qv >= 0, and the rotated
/// cones u_mk^2 <= q_mk. When an_enabled is false qv is fixed at zero.
struct ConicSubproblem {
  Eigen::Index num_aps = 0;
  Eigen::Index num_users = 0;
  Eigen::Index num_eves = 0;
  bool an_enabled = true;
  double p_t = 1.0;
  std::vector<CouplingRow> rows;
  int num_user_rows = 0;
  int num_leakage_rows = 0;
  ScaledPoint expansion;  // the iterate the surrogates were built around

  int num_omega() const { return static_cast<int>(num_eves * num_users); }
  int tail_size() const { return num_omega() + 1; }
  int t_index() const { return num_omega(); }

  Eigen::Index variable_count() const {
    const Eigen::Index mk = num_aps * num_users;
    return mk + num_aps + num_eves * num_users + 1 + mk;
  }
  Eigen::Index constraint_count() const {
    const Eigen::Index mk = num_aps * num_users;
    return static_cast<Eigen::Index>(rows.size()) + num_aps + (mk + num_aps) + mk;
  }
};

/// A candidate point for a subproblem: block variables plus (omega, t).
struct SubproblemPoint {
  ScaledPoint x;
  Vector tail;
};

inline double row_value(const CouplingRow& row, const SubproblemPoint& pt) {
  double v = row.expr(pt.x);
  for (const auto& [idx, coef] : row.tail) v += coef * pt.tail(idx);
  return v;
}

/// Largest constraint violation of pt (0 when feasible).
inline double max_violation(const ConicSubproblem& sp, const SubproblemPoint& pt) {
  double worst = 0.0;
  for (const auto& row : sp.rows) worst = std::max(worst, -row_value(row, pt));
  const auto& x = pt.x;
  for (Eigen::Index m = 0; m < sp.num_aps; ++m) {
    worst = std::max(worst, x.q.row(m).sum() + x.qv(m) - 1.0);
    worst = std::max(worst, -x.qv(m));
    if (!sp.an_enabled) worst = std::max(worst, std::abs(x.qv(m)));
    for (Eigen::Index k = 0; k < sp.num_users; ++k) {
      worst = std::max(worst, -x.q(m, k));
      worst = std::max(worst, x.u(m, k) * x.u(m, k) - x.q(m, k));
    }
  }
  return worst;
}

inline ConicSubproblem build_subproblem(const PowerAllocation& at, const ChannelStats& stats,
                                        const NetworkRealization& net, double p_t, const ScaConfig& cfg) {
  if (!(p_t > 0.0)) throw ConfigError("power budget must be positive");
  ConicSubproblem sp;
  sp.num_aps = net.beta.rows();
  sp.num_users = net.beta.cols();
  sp.num_eves = net.beta_eve.cols();
  sp.an_enabled = cfg.enable_an;
  sp.p_t = p_t;
  sp.expansion = to_scaled(at, stats, p_t);
  if (!cfg.enable_an) sp.expansion.qv.setZero();

  const Eigen::Index K = sp.num_users;
  const Eigen::Index J = sp.num_eves;
  const int t_idx = sp.t_index();

  std::vector<UserRateLinearization> user;
  for (Eigen::Index k = 0; k < K; ++k) user.push_back(linearize_user_rate(at, stats, net, p_t, k));

  if (J == 0) {
    for (Eigen::Index k = 0; k < K; ++k) sp.rows.push_back({user[k].expr, {{t_idx, -1.0}}});
    sp.num_user_rows = static_cast<int>(K);
    return sp;
  }
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index k = 0; k < K; ++k) {
      const int w = static_cast<int>(j * K + k);
      sp.rows.push_back({user[k].expr, {{w, -1.0}, {t_idx, -1.0}}});
    }
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index k = 0; k < K; ++k) {
      const int w = static_cast<int>(j * K + k);
      const auto leak = linearize_leakage_rate(at, stats, net, p_t, j, k, cfg.leakage_model);
      sp.rows.push_back({-leak.expr, {{w, 1.0}}});
    }
  sp.num_user_rows = static_cast<int>(J * K);
  sp.num_leakage_rows = static_cast<int>(J * K);
  return sp;
}

/// The expansion point lifted into subproblem variables: u = sqrt(q),
/// omega_jk = leakage bound, t = smallest user-rate-minus-leakage gap.
inline SubproblemPoint expansion_point(const ConicSubproblem& sp, const PowerAllocation& at,
                                       const ChannelStats& stats, const NetworkRealization& net) {
  SubproblemPoint pt;
  pt.x = sp.expansion;
  pt.tail = Vector::Zero(sp.tail_size());
  const auto rep = secrecy_report(at, stats, net);
  for (Eigen::Index j = 0; j < sp.num_eves; ++j)
    for (Eigen::Index k = 0; k < sp.num_users; ++k) pt.tail(j * sp.num_users + k) = rep.leakage(j, k);
  pt.tail(sp.t_index()) = rep.min_gap;
  return pt;
}

}  // namespace cfsec
