#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cfsec/core.hpp"
#include "cfsec/subproblem.hpp"

namespace cfsec {

enum class SolveStatus { optimal, inaccurate, failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::failed: return "failed";
  }
  return "unknown";
}

struct SubproblemSolution {
  SolveStatus status = SolveStatus::failed;
  SubproblemPoint point;
  double t = 0.0;
  double gap_bound = std::numeric_limits<double>::infinity();
  int newton_steps = 0;
  std::string message;
};

namespace detail {

// Log-barrier path following for ConicSubproblem. Variables are laid out as
// AP blocks [q_1..q_K, u_1..u_K, (qv)] followed by the tail (omega, t). The
// Newton matrix is blockdiag(D_m) + L^T W L where L has at most three rows per
// coupling constraint, so each step eliminates the blocks and solves a small
// KKT system in (z, dtail).
class BarrierSolver {
 public:
  explicit BarrierSolver(const ConicSubproblem& sp)
      : sp_(sp),
        M_(sp.num_aps),
        K_(sp.num_users),
        nb_(2 * sp.num_users + (sp.an_enabled ? 1 : 0)),
        nt_(sp.tail_size()),
        r_(static_cast<Eigen::Index>(sp.rows.size())) {
    Ay_ = Matrix::Zero(r_, M_ * nb_);
    As_ = Matrix::Zero(r_, nt_);
    b_ = Vector::Zero(r_);
    Qy_ = Matrix::Zero(r_, M_ * nb_);
    qc_ = Vector::Zero(r_);
    qw_ = Vector::Zero(r_);
    Ly_ = Matrix::Zero(r_, M_ * nb_);
    lc_ = Vector::Zero(r_);
    lw_ = Vector::Zero(r_);
    for (Eigen::Index i = 0; i < r_; ++i) {
      const auto& row = sp.rows[static_cast<std::size_t>(i)];
      if (row.expr.quad_weight < 0.0 || row.expr.log_weight < 0.0)
        throw SolverError("coupling row is not concave");
      b_(i) = row.expr.form.constant;
      scatter(row.expr.form, Ay_.row(i));
      if (row.expr.quad_weight > 0.0) {
        qw_(i) = row.expr.quad_weight;
        qc_(i) = row.expr.quad_arg.constant;
        scatter(row.expr.quad_arg, Qy_.row(i));
      }
      if (row.expr.log_weight > 0.0) {
        lw_(i) = row.expr.log_weight;
        lc_(i) = row.expr.log_arg.constant;
        scatter(row.expr.log_arg, Ly_.row(i));
      }
      for (const auto& [idx, coef] : row.tail) As_(i, idx) += coef;
    }
    num_barriers_ = static_cast<double>(r_ + M_ * (2 * K_ + 1 + (sp.an_enabled ? 1 : 0)));
  }

  SubproblemSolution solve(double tol) {
    SubproblemSolution sol;
    initial_point();
    double tau = 1.0;
    const double mu = 10.0;
    int total_steps = 0;
    bool stalled = false;
    for (int outer = 0; outer < 60; ++outer) {
      const int steps = center(tau, stalled);
      total_steps += steps;
      if (stalled || !std::isfinite(y_.sum()) || !std::isfinite(s_.sum())) break;
      if (num_barriers_ / tau <= tol) break;
      tau *= mu;
    }
    sol.newton_steps = total_steps;
    sol.gap_bound = num_barriers_ / tau;
    if (!std::isfinite(y_.sum()) || !std::isfinite(s_.sum())) {
      sol.status = SolveStatus::failed;
      sol.message = "non-finite iterate";
      return sol;
    }
    if (stalled) {
      if (sol.gap_bound <= std::sqrt(tol)) {
        sol.status = SolveStatus::inaccurate;
        sol.message = "line search stalled near optimum";
      } else {
        sol.status = SolveStatus::failed;
        sol.message = "line search stalled";
        return sol;
      }
    } else {
      sol.status = SolveStatus::optimal;
    }
    sol.point = unpack();
    sol.t = s_(sp_.t_index());
    return sol;
  }

 private:
  const ConicSubproblem& sp_;
  Eigen::Index M_, K_, nb_, nt_, r_;
  Matrix Ay_, As_;
  Vector b_;
  Matrix Qy_, Ly_;  // quadratic and logarithmic arguments, block part
  Vector qc_, qw_, lc_, lw_;
  Vector y_;  // block variables
  Vector s_;  // tail variables
  double num_barriers_ = 0.0;

  Eigen::Index qi(Eigen::Index m, Eigen::Index k) const { return m * nb_ + k; }
  Eigen::Index ui(Eigen::Index m, Eigen::Index k) const { return m * nb_ + K_ + k; }
  Eigen::Index vi(Eigen::Index m) const { return m * nb_ + 2 * K_; }

  template <typename Row>
  void scatter(const AffineForm& f, Row&& dst) const {
    for (Eigen::Index m = 0; m < M_; ++m) {
      for (Eigen::Index k = 0; k < K_; ++k) {
        dst(m * nb_ + k) = f.coef_q(m, k);
        dst(m * nb_ + K_ + k) = f.coef_u(m, k);
      }
      if (sp_.an_enabled) dst(m * nb_ + 2 * K_) = f.coef_qv(m);
    }
  }

  struct RowEval {
    Vector slack;
    Vector quad;  // quad_arg values
    Vector logs;  // log_arg values
    bool inside = true;
  };

  RowEval eval_rows(const Vector& y, const Vector& s) const {
    RowEval e;
    e.slack = Ay_ * y + As_ * s + b_;
    e.quad = Qy_ * y + qc_;
    e.logs = Ly_ * y + lc_;
    for (Eigen::Index i = 0; i < r_; ++i) {
      if (qw_(i) > 0.0) e.slack(i) -= qw_(i) * e.quad(i) * e.quad(i);
      if (lw_(i) > 0.0) {
        if (!(e.logs(i) > 0.0)) {
          e.inside = false;
          continue;
        }
        e.slack(i) += lw_(i) * std::log(e.logs(i));
      }
      if (!(e.slack(i) > 0.0)) e.inside = false;
    }
    return e;
  }

  void initial_point() {
    // Shrink the expansion point into the interior of every per-AP set.
    y_ = Vector::Zero(M_ * nb_);
    for (Eigen::Index m = 0; m < M_; ++m) {
      for (Eigen::Index k = 0; k < K_; ++k) {
        const double q = 0.8 * std::max(0.0, sp_.expansion.q(m, k)) + 0.05 / static_cast<double>(K_);
        y_(qi(m, k)) = q;
        y_(ui(m, k)) = 0.9 * std::sqrt(q);
      }
      if (sp_.an_enabled) y_(vi(m)) = 0.8 * std::max(0.0, sp_.expansion.qv(m)) + 0.05;
    }
    // Then pick the tail so every coupling row has unit slack.
    s_ = Vector::Zero(nt_);
    const Vector base = eval_rows(y_, Vector::Zero(nt_)).slack;
    const int t_idx = sp_.t_index();
    for (int w = 0; w < t_idx; ++w) {
      double need = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < r_; ++i)
        if (As_(i, w) > 0.0 && As_(i, t_idx) == 0.0) need = std::max(need, (1.0 - base(i)) / As_(i, w));
      s_(w) = std::isfinite(need) ? need : 0.0;
    }
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < r_; ++i) {
      if (As_(i, t_idx) < 0.0) {
        double rest = base(i);
        for (int w = 0; w < t_idx; ++w) rest += As_(i, w) * s_(w);
        t = std::min(t, (rest - 1.0) / -As_(i, t_idx));
      }
    }
    s_(t_idx) = std::isfinite(t) ? t : 0.0;
  }

  // Returns +inf when (y, s) is outside the barrier domain.
  double objective(const Vector& y, const Vector& s, double tau) const {
    double f = -tau * s(sp_.t_index());
    for (Eigen::Index m = 0; m < M_; ++m) {
      double budget = 1.0;
      for (Eigen::Index k = 0; k < K_; ++k) {
        const double q = y(qi(m, k));
        const double u = y(ui(m, k));
        const double cone = q - u * u;
        if (!(q > 0.0) || !(cone > 0.0)) return std::numeric_limits<double>::infinity();
        f -= std::log(q) + std::log(cone);
        budget -= q;
      }
      if (sp_.an_enabled) {
        const double v = y(vi(m));
        if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
        f -= std::log(v);
        budget -= v;
      }
      if (!(budget > 0.0)) return std::numeric_limits<double>::infinity();
      f -= std::log(budget);
    }
    const RowEval rows = eval_rows(y, s);
    if (!rows.inside) return std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < r_; ++i) f -= std::log(rows.slack(i));
    return f;
  }

  int center(double tau, bool& stalled) {
    int steps = 0;
    for (; steps < 100; ++steps) {
      Vector gy = Vector::Zero(M_ * nb_);
      Vector gs = Vector::Zero(nt_);
      gs(sp_.t_index()) = -tau;
      std::vector<Eigen::LDLT<Matrix>> block_solvers;
      block_solvers.reserve(static_cast<std::size_t>(M_));

      for (Eigen::Index m = 0; m < M_; ++m) {
        Matrix D = Matrix::Zero(nb_, nb_);
        double budget = 1.0;
        for (Eigen::Index k = 0; k < K_; ++k) budget -= y_(qi(m, k));
        if (sp_.an_enabled) budget -= y_(vi(m));
        const double inv_b = 1.0 / budget;
        for (Eigen::Index k = 0; k < K_; ++k) {
          const Eigen::Index lq = k, lu = K_ + k;
          const double q = y_(qi(m, k));
          const double u = y_(ui(m, k));
          const double c = q - u * u;
          // -log q
          gy(qi(m, k)) += -1.0 / q;
          D(lq, lq) += 1.0 / (q * q);
          // -log(q - u^2), grad of cone slack is (1, -2u)
          gy(qi(m, k)) += -1.0 / c;
          gy(ui(m, k)) += 2.0 * u / c;
          const double ic2 = 1.0 / (c * c);
          D(lq, lq) += ic2;
          D(lq, lu) += -2.0 * u * ic2;
          D(lu, lq) += -2.0 * u * ic2;
          D(lu, lu) += 4.0 * u * u * ic2 + 2.0 / c;
        }
        if (sp_.an_enabled) {
          const double v = y_(vi(m));
          gy(vi(m)) += -1.0 / v;
          D(2 * K_, 2 * K_) += 1.0 / (v * v);
        }
        // -log(1 - sum q - qv), grad of slack is -1 on q and qv
        const double ib2 = inv_b * inv_b;
        for (Eigen::Index a = 0; a < nb_; ++a) {
          const bool a_in = a < K_ || a == 2 * K_;
          if (!a_in) continue;
          gy(m * nb_ + a) += inv_b;
          for (Eigen::Index c2 = 0; c2 < nb_; ++c2)
            if (c2 < K_ || c2 == 2 * K_) D(a, c2) += ib2;
        }
        block_solvers.emplace_back(D);
      }

      // Row barriers -log(s_i). Their Hessian is a sum of rank-one terms:
      // grad_i grad_i^T / s_i^2, plus (2 qw_i / s_i) Q_i Q_i^T and
      // (lw_i / (s_i l_i^2)) L_i L_i^T from the curvature of the slack.
      const RowEval rows = eval_rows(y_, s_);
      const Eigen::Index n_low = 3 * r_;
      Matrix Gy = Matrix::Zero(n_low, M_ * nb_);
      Matrix Gs = Matrix::Zero(n_low, nt_);
      Vector weight = Vector::Zero(n_low);
      for (Eigen::Index i = 0; i < r_; ++i) {
        const double si = rows.slack(i);
        Vector grad = Ay_.row(i).transpose();
        if (qw_(i) > 0.0) grad -= 2.0 * qw_(i) * rows.quad(i) * Qy_.row(i).transpose();
        if (lw_(i) > 0.0) grad += lw_(i) / rows.logs(i) * Ly_.row(i).transpose();
        gy -= grad / si;
        gs -= As_.row(i).transpose() / si;
        Gy.row(i) = grad.transpose();
        Gs.row(i) = As_.row(i);
        weight(i) = 1.0 / (si * si);
        if (qw_(i) > 0.0) {
          Gy.row(r_ + i) = Qy_.row(i);
          weight(r_ + i) = 2.0 * qw_(i) / si;
        }
        if (lw_(i) > 0.0) {
          Gy.row(2 * r_ + i) = Ly_.row(i);
          weight(2 * r_ + i) = lw_(i) / (si * rows.logs(i) * rows.logs(i));
        }
      }
      std::vector<Eigen::Index> active;
      for (Eigen::Index i = 0; i < n_low; ++i)
        if (weight(i) > 0.0) active.push_back(i);
      const Eigen::Index nl = static_cast<Eigen::Index>(active.size());
      Matrix Ly(nl, M_ * nb_), Ls(nl, nt_);
      Vector w(nl);
      for (Eigen::Index a = 0; a < nl; ++a) {
        Ly.row(a) = Gy.row(active[static_cast<std::size_t>(a)]);
        Ls.row(a) = Gs.row(active[static_cast<std::size_t>(a)]);
        w(a) = weight(active[static_cast<std::size_t>(a)]);
      }

      // D^{-1} applied blockwise.
      auto apply_dinv = [&](const Vector& v) {
        Vector out(v.size());
        for (Eigen::Index m = 0; m < M_; ++m)
          out.segment(m * nb_, nb_) = block_solvers[static_cast<std::size_t>(m)].solve(v.segment(m * nb_, nb_));
        return out;
      };
      Matrix DinvLt(M_ * nb_, nl);
      for (Eigen::Index a = 0; a < nl; ++a) DinvLt.col(a) = apply_dinv(Ly.row(a).transpose());
      const Vector dinv_g = apply_dinv(gy);

      // With z = W L dx:  (L_y D^{-1} L_y^T + W^{-1}) z - L_s ds = -L_y D^{-1} g_y,  L_s^T z = -g_s.
      const Eigen::Index n_kkt = nl + nt_;
      Matrix kkt = Matrix::Zero(n_kkt, n_kkt);
      kkt.topLeftCorner(nl, nl) = Ly * DinvLt;
      for (Eigen::Index a = 0; a < nl; ++a) kkt(a, a) += 1.0 / w(a);
      kkt.topRightCorner(nl, nt_) = -Ls;
      kkt.bottomLeftCorner(nt_, nl) = Ls.transpose();
      Vector rhs(n_kkt);
      rhs.head(nl) = -Ly * dinv_g;
      rhs.tail(nt_) = -gs;
      const Vector sol = kkt.fullPivLu().solve(rhs);
      const Vector z = sol.head(nl);
      const Vector ds = sol.tail(nt_);
      const Vector dy = -(dinv_g + DinvLt * z);

      const double decrement = -(gy.dot(dy) + gs.dot(ds));
      if (!std::isfinite(decrement)) {
        stalled = true;
        return steps;
      }
      if (decrement / 2.0 <= 1e-10) return steps;

      const double f0 = objective(y_, s_, tau);
      const double slope = gy.dot(dy) + gs.dot(ds);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Vector y1 = y_ + alpha * dy;
        const Vector s1 = s_ + alpha * ds;
        const double f1 = objective(y1, s1, tau);
        if (std::isfinite(f1) && f1 <= f0 + 0.25 * alpha * slope) {
          y_ = y1;
          s_ = s1;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // No measurable progress is possible in floating point; treat as centered
        // when the decrement is already small.
        stalled = decrement > 1e-6;
        return steps;
      }
    }
    return steps;
  }

  SubproblemPoint unpack() const {
    SubproblemPoint pt;
    pt.x.q.resize(M_, K_);
    pt.x.u.resize(M_, K_);
    pt.x.qv = Vector::Zero(M_);
    for (Eigen::Index m = 0; m < M_; ++m) {
      for (Eigen::Index k = 0; k < K_; ++k) {
        pt.x.q(m, k) = y_(qi(m, k));
        pt.x.u(m, k) = y_(ui(m, k));
      }
      if (sp_.an_enabled) pt.x.qv(m) = y_(vi(m));
    }
    pt.tail = s_;
    return pt;
  }
};

}  // namespace detail

/// Solves one SCA subproblem to a duality gap of cfg.solver_tol. The returned
/// point is strictly interior, so every power is positive and every budget
/// holds with positive slack. Deterministic for identical inputs.
inline SubproblemSolution solve_subproblem(const ConicSubproblem& sp, const ScaConfig& cfg) {
  detail::BarrierSolver solver(sp);
  return solver.solve(cfg.solver_tol);
}

}  // namespace cfsec
