/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/formulation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mgrid {

namespace {

constexpr double kBigMMargin = 1.1;
constexpr double kDecodeTol = 1e-6;

std::string tagged(const std::string& tag, const char* what) { return std::string(what) + "[" + tag + "]"; }

}  // namespace

BigMParams compute_big_m(const MicrogridParams& params) {
  const auto& box = params.battery.polytope.box();
  BigMParams m;
  m.M_pv = kBigMMargin * (params.pv.p_max - params.pv.p_min);
  m.m_pv = -m.M_pv;
  const double mu_max = params.droop.k_b * (box.p_max - box.p_min) + params.droop.k_fc * params.fc.p_max;
  m.M_fc = kBigMMargin * (params.droop.k_fc * params.fc.p_max + mu_max);
  m.m_fc = -m.M_fc;
  return m;
}

void add_pv_curtailment(ProgramBuilder& b, const std::string& tag, int u_pv, int p_pv, int delta_pv,
                        double w_pv, const BigMParams& big_m) {
  b.add_le(tagged(tag, "pv_follow_setpoint"), {{u_pv, 1.0}, {delta_pv, -big_m.M_pv}, {p_pv, -1.0}}, 0.0);
  b.add_le(tagged(tag, "pv_below_setpoint"), {{p_pv, 1.0}, {u_pv, -1.0}}, 0.0);
  // p_pv >= w_pv + m_pv*(1 - delta_pv); with m_pv < 0 this relaxes for delta_pv = 0.
  b.add_le(tagged(tag, "pv_follow_available"), {{delta_pv, -big_m.m_pv}, {p_pv, -1.0}}, -w_pv - big_m.m_pv);
  b.add_le(tagged(tag, "pv_below_available"), {{p_pv, 1.0}}, w_pv);
}

void add_fc_on_off(ProgramBuilder& b, const std::string& tag, int u_fc, int p_fc, int delta_fc,
                   const FcParams& fc) {
  b.add_le(tagged(tag, "fc_output_min"), {{delta_fc, fc.p_min}, {p_fc, -1.0}}, 0.0);
  b.add_le(tagged(tag, "fc_output_max"), {{p_fc, 1.0}, {delta_fc, -fc.p_max}}, 0.0);
  b.add_le(tagged(tag, "fc_setpoint_min"), {{delta_fc, fc.p_min}, {u_fc, -1.0}}, 0.0);
  b.add_le(tagged(tag, "fc_setpoint_max"), {{u_fc, 1.0}, {delta_fc, -fc.p_max}}, 0.0);
}

void add_fc_sharing(ProgramBuilder& b, const std::string& tag, int u_fc, int p_fc, int mu, int delta_fc,
                    double k_fc, const BigMParams& big_m) {
  const double M = big_m.M_fc;
  const double m = big_m.m_fc;
  b.add_le(tagged(tag, "fc_share_upper_off"), {{p_fc, k_fc}, {u_fc, -k_fc}, {delta_fc, -M}}, 0.0);
  b.add_le(tagged(tag, "fc_share_lower_off"), {{p_fc, -k_fc}, {u_fc, k_fc}, {delta_fc, m}}, 0.0);
  b.add_le(tagged(tag, "fc_share_upper_on"), {{p_fc, k_fc}, {u_fc, -k_fc}, {mu, -1.0}, {delta_fc, -m}}, -m);
  b.add_le(tagged(tag, "fc_share_lower_on"), {{p_fc, -k_fc}, {u_fc, k_fc}, {mu, 1.0}, {delta_fc, M}}, M);
}

void add_switching(ProgramBuilder& b, const std::string& tag, int delta, int prev_var, double prev_value,
                   int slack) {
  if (prev_var >= 0) {
    b.add_le(tagged(tag, "switch_on"), {{delta, 1.0}, {prev_var, -1.0}, {slack, -1.0}}, 0.0);
    b.add_le(tagged(tag, "switch_off"), {{prev_var, 1.0}, {delta, -1.0}, {slack, -1.0}}, 0.0);
  } else {
    b.add_le(tagged(tag, "switch_on"), {{delta, 1.0}, {slack, -1.0}}, prev_value);
    b.add_le(tagged(tag, "switch_off"), {{delta, -1.0}, {slack, -1.0}}, -prev_value);
  }
}

MpcProblem build_mpc_problem(const MicrogridParams& params, double x0, int delta_prev,
                             std::span<const Forecast> forecasts, bool include_polytope) {
  const int horizon = params.horizon_steps;
  if (static_cast<int>(forecasts.size()) != horizon) {
    throw std::invalid_argument("build_mpc_problem: expected " + std::to_string(horizon) + " forecasts, got " +
                                std::to_string(forecasts.size()));
  }
  if (delta_prev != 0 && delta_prev != 1) throw std::invalid_argument("build_mpc_problem: delta_prev must be 0 or 1");
  for (const auto& f : forecasts) {
    if (!(f.w_pv >= 0.0) || !std::isfinite(f.w_pv) || !std::isfinite(f.w_l)) {
      throw std::invalid_argument("build_mpc_problem: forecasts must be finite with w_pv >= 0");
    }
  }

  const StoragePolytope& poly = params.battery.polytope;
  const EnergyPowerBox& box = poly.box();

  const double x0_used = poly.clamp_energy(x0);
  MpcProblem prob{.program = {},
                  .layout = {},
                  .params = params,
                  .big_m = compute_big_m(params),
                  .forecasts = {forecasts.begin(), forecasts.end()},
                  .x0 = x0_used,
                  .delta_prev = delta_prev,
                  .include_polytope = include_polytope,
                  .x0_clamped = x0_used != x0};

  const auto& bm = prob.big_m;
  const double mu_bound = bm.M_fc / kBigMMargin;
  ProgramBuilder b;
  auto& layout = prob.layout;
  layout.x.push_back(b.add_variable("x[0]", prob.x0, prob.x0));
  for (int j = 0; j < horizon; ++j) {
    const std::string t = std::to_string(j);
    StepVariables v;
    v.u_fc = b.add_variable("u_fc[" + t + "]", 0.0, params.fc.p_max);
    v.u_b = b.add_variable("u_b[" + t + "]", box.p_min, box.p_max);
    v.u_pv = b.add_variable("u_pv[" + t + "]", params.pv.p_min, params.pv.p_max);
    v.p_fc = b.add_variable("p_fc[" + t + "]", 0.0, params.fc.p_max);
    v.p_b = b.add_variable("p_b[" + t + "]", box.p_min, box.p_max);
    v.p_pv = b.add_variable("p_pv[" + t + "]", params.pv.p_min, params.pv.p_max);
    v.mu = b.add_variable("mu[" + t + "]", -mu_bound, mu_bound);
    v.delta_fc = b.add_binary("delta_fc[" + t + "]");
    v.delta_pv = b.add_binary("delta_pv[" + t + "]");
    v.s_sw = b.add_variable("s_sw[" + t + "]", 0.0, 1.0);
    layout.steps.push_back(v);
    layout.x.push_back(b.add_variable("x[" + std::to_string(j + 1) + "]", box.x_min, box.x_max));
  }
  layout.count = b.variable_count();

  const auto& cost = params.cost;
  double weight = 1.0;
  for (int j = 0; j < horizon; ++j) {
    const std::string t = std::to_string(j);
    const StepVariables& v = layout.steps[j];
    const int xj = layout.x[j];
    const int xn = layout.x[j + 1];
    const Forecast& w = forecasts[j];

    add_pv_curtailment(b, t, v.u_pv, v.p_pv, v.delta_pv, w.w_pv, bm);
    add_fc_on_off(b, t, v.u_fc, v.p_fc, v.delta_fc, params.fc);
    b.add_eq("soc_dynamics[" + t + "]", {{xn, 1.0}, {xj, -1.0}, {v.p_b, params.dt_mpc_h}}, 0.0);
    b.add_eq("battery_share[" + t + "]", {{v.p_b, params.droop.k_b}, {v.u_b, -params.droop.k_b}, {v.mu, -1.0}},
             0.0);
    add_fc_sharing(b, t, v.u_fc, v.p_fc, v.mu, v.delta_fc, params.droop.k_fc, bm);
    b.add_eq("power_balance[" + t + "]", {{v.p_fc, 1.0}, {v.p_b, 1.0}, {v.p_pv, 1.0}}, w.w_l);
    if (j == 0) {
      add_switching(b, t, v.delta_fc, -1, static_cast<double>(delta_prev), v.s_sw);
    } else {
      add_switching(b, t, v.delta_fc, layout.steps[j - 1].delta_fc, 0.0, v.s_sw);
    }

    if (include_polytope) {
      const std::pair<int, const char*> pairs[] = {
          {v.p_b, "output"}, {v.p_b, "output_next"}, {v.u_b, "setpoint"}, {v.u_b, "setpoint_next"}};
      int k = 0;
      for (const auto& h : poly.planes()) {
        for (int pair = 0; pair < 4; ++pair) {
          const int xv = pair % 2 == 0 ? xj : xn;
          b.add_le("polytope_" + std::string(pairs[pair].second) + "[" + t + "," + std::to_string(k) + "]",
                   {{xv, h.a}, {pairs[pair].first, h.b}}, h.c);
        }
        ++k;
      }
    }

    weight *= cost.gamma;
    const double pv_max = params.pv.p_max;
    b.add_quadratic_cost(v.p_pv, v.p_pv, weight * cost.c_pv_quad);
    b.add_linear_cost(v.p_pv, -2.0 * weight * cost.c_pv_quad * pv_max);
    b.add_constant_cost(weight * cost.c_pv_quad * pv_max * pv_max);
    b.add_linear_cost(v.delta_fc, weight * cost.c_fc_run_fixed);
    b.add_linear_cost(v.p_fc, weight * cost.c_fc_run_linear);
    b.add_linear_cost(v.s_sw, weight * cost.c_fc_switch);
    b.add_quadratic_cost(v.p_b, v.p_b, weight * cost.c_b_quad);
  }

  prob.program = b.build();
  const auto& qp = prob.program.qp;
  for (Eigen::Index i = 0; i < qp.num_variables(); ++i) {
    if (qp.lower(i) > qp.upper(i)) {
      throw std::invalid_argument("build_mpc_problem: empty box for " + qp.variable_names[i]);
    }
  }
  return prob;
}

PlannedTrajectories decode_solution(const MpcProblem& problem, std::span<const double> raw,
                                    double solver_objective) {
  const auto& layout = problem.layout;
  if (static_cast<int>(raw.size()) != layout.count) {
    throw std::invalid_argument("decode_solution: raw vector length does not match layout");
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
  for (auto b : problem.program.binaries) {
    const double r = std::round(x(b));
    if (std::abs(x(b) - r) > kDecodeTol) {
      std::ostringstream os;
      os << "decode_solution: " << problem.program.qp.variable_names[b] << " = " << x(b) << " is not binary";
      throw std::runtime_error(os.str());
    }
    x(b) = r;
  }
  const double residual = problem.program.qp.max_violation(x);
  if (residual > kDecodeTol) {
    std::ostringstream os;
    os << "decode_solution: constraint residual " << residual << " exceeds " << kDecodeTol;
    throw std::runtime_error(os.str());
  }

  PlannedTrajectories t;
  const auto& params = problem.params;
  double weight = 1.0;
  int prev = problem.delta_prev;
  for (const auto& v : layout.steps) {
    t.u_fc.push_back(x(v.u_fc));
    t.u_b.push_back(x(v.u_b));
    t.u_pv.push_back(x(v.u_pv));
    t.p_fc.push_back(x(v.p_fc));
    t.p_b.push_back(x(v.p_b));
    t.p_pv.push_back(x(v.p_pv));
    t.mu.push_back(x(v.mu));
    t.s_sw.push_back(x(v.s_sw));
    const int dfc = static_cast<int>(x(v.delta_fc));
    t.delta_fc.push_back(dfc);
    t.delta_pv.push_back(static_cast<int>(x(v.delta_pv)));
    weight *= params.cost.gamma;
    t.objective += weight * stage_cost(x(v.p_fc), x(v.p_b), x(v.p_pv), dfc, prev, params.cost, params.pv.p_max);
    prev = dfc;
  }
  for (int xi : layout.x) t.x.push_back(x(xi));

  if (std::abs(t.objective - solver_objective) > kDecodeTol) {
    std::ostringstream os;
    os << "decode_solution: recomputed objective " << t.objective << " differs from solver objective "
       << solver_objective;
    throw std::runtime_error(os.str());
  }
  return t;
}

ControlSetpoints first_control(const PlannedTrajectories& traj) {
  if (traj.u_fc.empty()) throw std::invalid_argument("first_control: empty trajectory");
  return {traj.u_fc.front(), traj.u_b.front(), traj.u_pv.front(), traj.delta_fc.front()};
}

}  // namespace mgrid
