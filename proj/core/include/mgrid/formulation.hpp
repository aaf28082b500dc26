/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/model.hpp"
#include "mgrid/program.hpp"

#include <span>
#include <string>
#include <vector>

namespace mgrid {

/// Big-M constants for the PV curtailment and fuel-cell sharing logic.
struct BigMParams {
  double M_pv = 0.0;
  double m_pv = 0.0;
  double M_fc = 0.0;
  double m_fc = 0.0;
};

/// Big-M values with a 10 % margin over the tightest valid bound.
BigMParams compute_big_m(const MicrogridParams& params);

/// Exogenous inputs for one controller step (pu).
struct Forecast {
  double w_pv = 0.0;
  double w_l = 0.0;
};

/// Variable indices of one prediction step.
struct StepVariables {
  int u_fc = -1;
  int u_b = -1;
  int u_pv = -1;
  int p_fc = -1;
  int p_b = -1;
  int p_pv = -1;
  int mu = -1;
  int delta_fc = -1;
  int delta_pv = -1;
  int s_sw = -1;  ///< |delta_fc(j) - delta_fc(j-1)|
};

struct VariableLayout {
  std::vector<StepVariables> steps;  ///< J entries
  std::vector<int> x;                ///< J + 1 entries, x[0] is the measured state
  int count = 0;
};

/// One receding-horizon problem together with the data it was built from.
struct MpcProblem {
  MixedBinaryQp program;
  VariableLayout layout;
  MicrogridParams params;
  BigMParams big_m;
  std::vector<Forecast> forecasts;
  double x0 = 0.0;
  int delta_prev = 0;
  bool include_polytope = true;
  bool x0_clamped = false;
};

struct PlannedTrajectories {
  std::vector<double> u_fc, u_b, u_pv;
  std::vector<double> p_fc, p_b, p_pv;
  std::vector<double> mu, s_sw;
  std::vector<int> delta_fc, delta_pv;
  std::vector<double> x;
  double objective = 0.0;
};

/// Builds the mixed-binary QP for one controller instant. Throws
/// std::invalid_argument if the forecast count differs from the horizon or a
/// variable box is empty.
MpcProblem build_mpc_problem(const MicrogridParams& params, double x0, int delta_prev,
                             std::span<const Forecast> forecasts, bool include_polytope);

/// Rounds binaries, re-checks every constraint and recomputes the discounted
/// stage costs. Throws std::runtime_error on any inconsistency with the solver
/// result (tolerance 1e-6).
PlannedTrajectories decode_solution(const MpcProblem& problem, std::span<const double> raw,
                                    double solver_objective);

ControlSetpoints first_control(const PlannedTrajectories& traj);

// ---------------------------------------------------------------------------
// Constraint blocks shared by build_mpc_problem and the fidelity tests.

/// p_pv = min(u_pv, w_pv) via two big-M pairs on delta_pv.
void add_pv_curtailment(ProgramBuilder& b, const std::string& tag, int u_pv, int p_pv, int delta_pv,
                        double w_pv, const BigMParams& big_m);

/// delta*p_min <= p <= delta*p_max for both output and setpoint.
void add_fc_on_off(ProgramBuilder& b, const std::string& tag, int u_fc, int p_fc, int delta_fc,
                   const FcParams& fc);

/// k_fc*(p_fc - u_fc) = mu*delta_fc via four big-M inequalities.
void add_fc_sharing(ProgramBuilder& b, const std::string& tag, int u_fc, int p_fc, int mu, int delta_fc,
                    double k_fc, const BigMParams& big_m);

/// slack >= |delta - delta_prev|. Pass prev_var = -1 to use the constant prev_value.
void add_switching(ProgramBuilder& b, const std::string& tag, int delta, int prev_var, double prev_value,
                   int slack);

}  // namespace mgrid
