/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mgrid {

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
    case QpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStepFraction = 0.99;
constexpr double kDivergence = 1e12;
constexpr double kPrimalReg = 1e-10;
constexpr double kDualReg = 1e-12;
constexpr int kRefinementSteps = 2;

struct SparseRow {
  std::vector<int> idx;
  std::vector<double> val;

  double dot(const VectorXd& x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) acc += val[k] * x(idx[k]);
    return acc;
  }
};

// min 0.5 x'Hx + c'x  s.t.  E x = f,  g_i'x <= h_i
struct CoreProblem {
  int n = 0;
  MatrixXd H;
  VectorXd c;
  MatrixXd E;
  VectorXd f;
  std::vector<SparseRow> G;
  VectorXd h;
};

VectorXd apply_rows(const std::vector<SparseRow>& rows, const VectorXd& x) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = rows[i].dot(x);
  return out;
}

VectorXd apply_rows_transpose(const std::vector<SparseRow>& rows, const VectorXd& v, int n) {
  VectorXd out = VectorXd::Zero(n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double vi = v(static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < rows[i].idx.size(); ++k) out(rows[i].idx[k]) += rows[i].val[k] * vi;
  }
  return out;
}

// Solves [K E'; E 0] [dx; dy] = [r1; r2] by LU of the lightly regularised,
// symmetrically scaled system, followed by iterative refinement against the
// unregularised matrix. Near the optimum K mixes curvature of order 1e10 with
// directions of almost none, so the scaling matters.
class KktSolver {
 public:
  bool factor(const MatrixXd& k0, const MatrixXd& e) {
    k0_ = &k0;
    e_ = &e;
    const Eigen::Index n = k0.rows();
    const Eigen::Index me = e.rows();
    scale_.resize(n + me);
    for (Eigen::Index i = 0; i < n; ++i) scale_(i) = 1.0 / std::sqrt(std::max(k0(i, i), 1.0));
    scale_.tail(me).setOnes();
    MatrixXd m(n + me, n + me);
    m.topLeftCorner(n, n) = k0;
    m.topLeftCorner(n, n).diagonal().array() += kPrimalReg;
    if (me > 0) {
      m.topRightCorner(n, me) = e.transpose();
      m.bottomLeftCorner(me, n) = e;
      m.bottomRightCorner(me, me).setIdentity();
      m.bottomRightCorner(me, me) *= -kDualReg;
    }
    m = scale_.asDiagonal() * m * scale_.asDiagonal();
    lu_.compute(m);
    return lu_.matrixLU().diagonal().allFinite();
  }

  void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& dx, VectorXd& dy) const {
    const Eigen::Index n = k0_->rows();
    VectorXd rhs(n + r2.size());
    rhs << r1, r2;
    VectorXd sol = solve_regularised(rhs);
    for (int it = 0; it < kRefinementSteps; ++it) {
      VectorXd res(rhs.size());
      res.head(n) = r1 - *k0_ * sol.head(n);
      if (r2.size() > 0) {
        res.head(n) -= e_->transpose() * sol.tail(r2.size());
        res.tail(r2.size()) = r2 - *e_ * sol.head(n);
      }
      sol += solve_regularised(res);
    }
    dx = sol.head(n);
    dy = sol.tail(r2.size());
  }

 private:
  VectorXd solve_regularised(const VectorXd& rhs) const {
    return scale_.asDiagonal() * lu_.solve(VectorXd(scale_.asDiagonal() * rhs));
  }

  const MatrixXd* k0_ = nullptr;
  const MatrixXd* e_ = nullptr;
  VectorXd scale_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

enum class IpmExit { Converged, Diverged, Stalled, PrimalStagnation };

struct IpmOutcome {
  IpmExit exit = IpmExit::Stalled;
  VectorXd x;
  int iterations = 0;
  bool acceptable = false;  // residuals within QpSettings::acceptable_residual
};

// Primal residual history used to give up early on (likely) infeasible
// programs. The window is long enough that feasible problems, whose primal
// residual shrinks with every reasonable step, are never cut off in practice.
constexpr int kStagnationWindow = 6;
constexpr double kStagnationRatio = 0.5;

double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

IpmOutcome run_ipm(const CoreProblem& p, VectorXd x, const QpSettings& settings, bool stop_on_stagnation) {
  const int n = p.n;
  const auto m = static_cast<Eigen::Index>(p.G.size());
  const auto me = p.E.rows();

  VectorXd y = VectorXd::Zero(me);
  VectorXd s(m);
  VectorXd z = VectorXd::Ones(m);
  {
    const VectorXd gx = apply_rows(p.G, x);
    for (Eigen::Index i = 0; i < m; ++i) s(i) = std::max(p.h(i) - gx(i), 1.0);
  }

  const double c_scale = 1.0 + (n > 0 ? p.c.lpNorm<Eigen::Infinity>() : 0.0);
  double b_scale = 1.0;
  if (me > 0) b_scale = std::max(b_scale, 1.0 + p.f.lpNorm<Eigen::Infinity>());
  if (m > 0) b_scale = std::max(b_scale, 1.0 + p.h.lpNorm<Eigen::Infinity>());

  KktSolver kkt;
  MatrixXd k0(n, n);
  VectorXd dx, dy;
  IpmOutcome out;
  int stalls = 0;
  std::vector<double> pres_history;
  double best_merit = std::numeric_limits<double>::infinity();
  VectorXd best_x;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    out.iterations = iter;
    const VectorXd gx = apply_rows(p.G, x);
    VectorXd rd = p.H * x + p.c + apply_rows_transpose(p.G, z, n);
    if (me > 0) rd += p.E.transpose() * y;
    const VectorXd rp = me > 0 ? VectorXd(p.E * x - p.f) : VectorXd();
    const VectorXd rg = gx + s - p.h;

    const double gap = m > 0 ? s.dot(z) : 0.0;
    const double mu = m > 0 ? gap / static_cast<double>(m) : 0.0;
    const double pobj = 0.5 * x.dot(p.H * x) + p.c.dot(x);
    const double pres = std::max(me > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0,
                                 m > 0 ? rg.lpNorm<Eigen::Infinity>() : 0.0);
    const double dres = n > 0 ? rd.lpNorm<Eigen::Infinity>() : 0.0;

    const double acc = settings.acceptable_residual;
    const double merit = std::max({pres / b_scale, dres / c_scale, gap / (1.0 + std::abs(pobj))});
    if (pres <= acc && dres <= acc * c_scale && gap <= acc * (1.0 + std::abs(pobj)) && merit < best_merit) {
      best_merit = merit;
      best_x = x;
    }
    // Near the end, ill-conditioned KKT systems occasionally throw the
    // iterate off; stop and fall back to the best acceptable point.
    if (merit > 1e3 * best_merit) break;
    if (pres <= settings.tolerance * b_scale && dres <= settings.tolerance * c_scale &&
        gap <= settings.tolerance * (1.0 + std::abs(pobj))) {
      out.exit = IpmExit::Converged;
      break;
    }
    if (n > 0 && x.lpNorm<Eigen::Infinity>() > kDivergence) {
      out.exit = IpmExit::Diverged;
      break;
    }
    if (iter == settings.max_iterations || stalls >= 3) break;
    pres_history.push_back(pres / b_scale);
    if (stop_on_stagnation && pres > acc && pres_history.size() > kStagnationWindow &&
        pres_history.back() > kStagnationRatio * pres_history[pres_history.size() - 1 - kStagnationWindow]) {
      out.exit = IpmExit::PrimalStagnation;
      break;
    }

    const VectorXd w = z.cwiseQuotient(s);
    k0 = p.H;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = p.G[static_cast<std::size_t>(i)];
      for (std::size_t a = 0; a < row.idx.size(); ++a) {
        const double wa = w(i) * row.val[a];
        for (std::size_t b = 0; b < row.idx.size(); ++b) k0(row.idx[a], row.idx[b]) += wa * row.val[b];
      }
    }
    if (!kkt.factor(k0, p.E)) break;

    // Predictor (affine scaling) direction.
    const VectorXd r2 = me > 0 ? VectorXd(-rp) : VectorXd();
    VectorXd r1 = -rd - apply_rows_transpose(p.G, VectorXd(w.cwiseProduct(rg) - z), n);
    kkt.solve(r1, r2, dx, dy);
    VectorXd ds = -rg - apply_rows(p.G, dx);
    VectorXd dz = -z - w.cwiseProduct(ds);

    double sigma = 0.0;
    VectorXd rc = s.cwiseProduct(z);
    if (m > 0) {
      const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
      const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
      sigma = std::pow(mu_aff / mu, 3);
      rc += ds.cwiseProduct(dz);
      rc.array() -= sigma * mu;

      // Corrector.
      r1 = -rd - apply_rows_transpose(p.G, VectorXd(w.cwiseProduct(rg) - rc.cwiseQuotient(s)), n);
      kkt.solve(r1, r2, dx, dy);
      ds = -rg - apply_rows(p.G, dx);
      dz = (-rc - z.cwiseProduct(ds)).cwiseQuotient(s);
    }

    const double alpha = m > 0 ? std::min(1.0, kStepFraction * std::min(max_step(s, ds), max_step(z, dz))) : 1.0;
    stalls = alpha < 1e-12 ? stalls + 1 : 0;
    x += alpha * dx;
    if (me > 0) y += alpha * dy;
    if (m > 0) {
      s += alpha * ds;
      z += alpha * dz;
    }
  }
  if (out.exit != IpmExit::Converged && best_x.size() > 0) {
    out.x = std::move(best_x);
    out.acceptable = true;
  } else {
    out.x = std::move(x);
  }
  return out;
}

// Phase 1: min t  s.t.  g_i'x - t <= h_i,  |e_j'x - f_j| <= t,  t >= 0.
double minimum_violation(const CoreProblem& p, const VectorXd& x0, const QpSettings& settings, VectorXd& x_out) {
  CoreProblem q;
  q.n = p.n + 1;
  const int t = p.n;
  q.H = MatrixXd::Zero(q.n, q.n);
  q.c = VectorXd::Zero(q.n);
  q.c(t) = 1.0;
  q.E.resize(0, q.n);
  q.f.resize(0);

  std::vector<double> rhs;
  for (std::size_t i = 0; i < p.G.size(); ++i) {
    SparseRow r = p.G[i];
    r.idx.push_back(t);
    r.val.push_back(-1.0);
    q.G.push_back(std::move(r));
    rhs.push_back(p.h(static_cast<Eigen::Index>(i)));
  }
  for (Eigen::Index j = 0; j < p.E.rows(); ++j) {
    SparseRow pos;
    SparseRow neg;
    for (int k = 0; k < p.n; ++k) {
      if (p.E(j, k) != 0.0) {
        pos.idx.push_back(k);
        pos.val.push_back(p.E(j, k));
        neg.idx.push_back(k);
        neg.val.push_back(-p.E(j, k));
      }
    }
    pos.idx.push_back(t);
    pos.val.push_back(-1.0);
    neg.idx.push_back(t);
    neg.val.push_back(-1.0);
    q.G.push_back(std::move(pos));
    rhs.push_back(p.f(j));
    q.G.push_back(std::move(neg));
    rhs.push_back(-p.f(j));
  }
  q.G.push_back(SparseRow{{t}, {-1.0}});
  rhs.push_back(0.0);
  q.h = Eigen::Map<VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  VectorXd start(q.n);
  start << x0, 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < q.G.size(); ++i) {
    worst = std::max(worst, q.G[i].dot(start) - q.h(static_cast<Eigen::Index>(i)));
  }
  start(t) = worst + 1.0;

  const IpmOutcome r = run_ipm(q, start, settings, false);
  x_out = r.x.head(p.n);
  // The phase-1 iterate is primal feasible by construction, so its t is an
  // upper bound on the true minimum violation.
  double violation = 0.0;
  for (std::size_t i = 0; i < p.G.size(); ++i) {
    violation = std::max(violation, p.G[i].dot(x_out) - p.h(static_cast<Eigen::Index>(i)));
  }
  if (p.E.rows() > 0) violation = std::max(violation, (p.E * x_out - p.f).lpNorm<Eigen::Infinity>());
  return violation;
}

void check_dimensions(const QuadraticProgram& qp) {
  const auto n = qp.linear.size();
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("solve_qp: ") + what); };
  if (qp.hessian.rows() != n || qp.hessian.cols() != n) fail("hessian must be n x n");
  if (qp.lower.size() != n || qp.upper.size() != n) fail("bounds must have length n");
  if (qp.eq_matrix.rows() != qp.eq_rhs.size()) fail("equality rows and rhs differ");
  if (qp.eq_matrix.rows() > 0 && qp.eq_matrix.cols() != n) fail("equality matrix must have n columns");
  if (qp.ineq_matrix.rows() != qp.ineq_rhs.size()) fail("inequality rows and rhs differ");
  if (qp.ineq_matrix.rows() > 0 && qp.ineq_matrix.cols() != n) fail("inequality matrix must have n columns");
  if (n > 0) {
    const double scale = 1.0 + qp.hessian.cwiseAbs().maxCoeff();
    if ((qp.hessian - qp.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      fail("hessian must be symmetric");
    }
  }
}

QpResult finish(const QuadraticProgram& qp, VectorXd x, QpStatus status, int iterations) {
  QpResult r;
  r.x = std::move(x);
  r.objective = qp.objective(r.x);
  r.max_residual = qp.max_violation(r.x);
  r.status = status;
  r.iterations = iterations;
  return r;
}

}  // namespace

QpResult solve_qp(const QuadraticProgram& qp, const QpSettings& settings) {
  check_dimensions(qp);
  const auto n = qp.num_variables();

  VectorXd full = VectorXd::Zero(n);
  std::vector<int> free_vars;
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (qp.lower(i) > qp.upper(i)) {
      full = qp.lower.cwiseMax(-kDivergence).cwiseMin(kDivergence);
      return finish(qp, full, QpStatus::Infeasible, 0);
    }
    if (qp.lower(i) == qp.upper(i)) {
      full(i) = qp.lower(i);
    } else {
      position[static_cast<std::size_t>(i)] = static_cast<int>(free_vars.size());
      free_vars.push_back(static_cast<int>(i));
    }
  }

  // Substitute fixed variables.
  CoreProblem p;
  p.n = static_cast<int>(free_vars.size());
  p.H.resize(p.n, p.n);
  p.c.resize(p.n);
  for (int a = 0; a < p.n; ++a) {
    for (int b = 0; b < p.n; ++b) p.H(a, b) = qp.hessian(free_vars[a], free_vars[b]);
    p.c(a) = qp.linear(free_vars[a]) + qp.hessian.row(free_vars[a]).dot(full);
  }

  double fixed_violation = 0.0;
  std::vector<Eigen::Index> eq_rows;
  for (Eigen::Index r = 0; r < qp.eq_matrix.rows(); ++r) {
    bool empty = true;
    for (int v : free_vars) empty = empty && qp.eq_matrix(r, v) == 0.0;
    const double rest = qp.eq_rhs(r) - qp.eq_matrix.row(r).dot(full);
    if (empty) {
      fixed_violation = std::max(fixed_violation, std::abs(rest));
    } else {
      eq_rows.push_back(r);
    }
  }
  p.E.resize(static_cast<Eigen::Index>(eq_rows.size()), p.n);
  p.f.resize(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t k = 0; k < eq_rows.size(); ++k) {
    const auto r = eq_rows[k];
    for (int a = 0; a < p.n; ++a) p.E(static_cast<Eigen::Index>(k), a) = qp.eq_matrix(r, free_vars[a]);
    p.f(static_cast<Eigen::Index>(k)) = qp.eq_rhs(r) - qp.eq_matrix.row(r).dot(full);
  }

  std::vector<double> rhs;
  for (Eigen::Index r = 0; r < qp.ineq_matrix.rows(); ++r) {
    SparseRow row;
    for (int a = 0; a < p.n; ++a) {
      const double v = qp.ineq_matrix(r, free_vars[a]);
      if (v != 0.0) {
        row.idx.push_back(a);
        row.val.push_back(v);
      }
    }
    const double rest = qp.ineq_rhs(r) - qp.ineq_matrix.row(r).dot(full);
    if (row.idx.empty()) {
      fixed_violation = std::max(fixed_violation, -rest);
    } else {
      p.G.push_back(std::move(row));
      rhs.push_back(rest);
    }
  }
  for (int a = 0; a < p.n; ++a) {
    const int v = free_vars[a];
    if (std::isfinite(qp.upper(v))) {
      p.G.push_back(SparseRow{{a}, {1.0}});
      rhs.push_back(qp.upper(v));
    }
    if (std::isfinite(qp.lower(v))) {
      p.G.push_back(SparseRow{{a}, {-1.0}});
      rhs.push_back(-qp.lower(v));
    }
  }
  p.h = Eigen::Map<VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  auto expand = [&](const VectorXd& xr) {
    VectorXd x = full;
    for (int a = 0; a < p.n; ++a) x(free_vars[a]) = xr(a);
    return x;
  };

  if (fixed_violation > settings.infeasibility_threshold) {
    return finish(qp, full, QpStatus::Infeasible, 0);
  }
  if (p.n == 0) return finish(qp, full, QpStatus::Optimal, 0);

  auto optimal = [&](const IpmOutcome& r, QpResult& result) {
    result = finish(qp, expand(r.x), QpStatus::IterationLimit, r.iterations);
    if ((r.exit == IpmExit::Converged || r.acceptable) && result.max_residual <= settings.acceptable_residual) {
      result.status = QpStatus::Optimal;
      return true;
    }
    return false;
  };
  IpmOutcome r = run_ipm(p, VectorXd::Zero(p.n), settings, true);
  QpResult result;
  if (optimal(r, result)) return result;

  // No optimum found: decide feasibility before blaming the objective.
  if (!p.G.empty() || p.E.rows() > 0) {
    VectorXd x1;
    const double violation = minimum_violation(p, r.x, settings, x1);
    if (violation > settings.infeasibility_threshold) {
      return finish(qp, expand(x1), QpStatus::Infeasible, r.iterations);
    }
  }
  if (r.exit == IpmExit::PrimalStagnation) {
    // Feasible after all: run phase 2 to completion.
    r = run_ipm(p, VectorXd::Zero(p.n), settings, false);
    if (optimal(r, result)) return result;
  }
  if (r.exit == IpmExit::Diverged) result.status = QpStatus::Unbounded;
  return result;
}

}  // namespace mgrid
