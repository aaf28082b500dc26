/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mgrid {

std::string_view to_string(ControllerMode mode) {
  return mode == ControllerMode::WithPolytope ? "with-polytope" : "without-polytope";
}

std::string_view to_string(PlantInput input) { return input == PlantInput::WindowMean ? "window-mean" : "raw"; }

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DischargeLimit: return "discharge-limit";
    case ViolationKind::ChargeLimit: return "charge-limit";
    case ViolationKind::EnergyBound: return "energy-bound";
    case ViolationKind::FcSaturationImbalance: return "fc-saturation-imbalance";
  }
  return "unknown";
}

std::size_t Scenario::plant_steps() const {
  return static_cast<std::size_t>(std::llround(duration_h / params.dt_plant_h));
}

std::size_t Scenario::mpc_steps() const {
  return static_cast<std::size_t>(std::llround(duration_h / params.dt_mpc_h));
}

void validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  const ValidationResult v = validate(s.params);
  errors.insert(errors.end(), v.errors.begin(), v.errors.end());
  if (!(s.duration_h > 0.0)) errors.push_back("duration must be positive");
  if (v.ok() && s.duration_h > 0.0) {
    const double windows = s.duration_h / s.params.dt_mpc_h;
    if (std::abs(windows - std::round(windows)) > 1e-9) {
      errors.push_back("duration must be a multiple of the controller sample time");
    }
    const std::size_t n = s.plant_steps();
    if (s.load.size() != n) {
      errors.push_back("load series has " + std::to_string(s.load.size()) + " samples, expected " + std::to_string(n));
    }
    if (s.irradiance.size() != n) {
      errors.push_back("irradiance series has " + std::to_string(s.irradiance.size()) + " samples, expected " +
                       std::to_string(n));
    }
  }
  if (s.delta_fc0 != 0 && s.delta_fc0 != 1) errors.push_back("initial fuel-cell state must be 0 or 1");
  if (!std::isfinite(s.x0)) errors.push_back("initial energy must be finite");
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& e : errors) os << "\n  " << e;
    throw std::invalid_argument(os.str());
  }
}

std::vector<Forecast> ForecastWindow::forecasts() const {
  std::vector<Forecast> out;
  out.reserve(w_l.size());
  for (std::size_t j = 0; j < w_l.size(); ++j) out.push_back({w_pv[j], w_l[j]});
  return out;
}

ForecastWindow window_average_forecast(const Scenario& scenario, std::size_t mpc_step, int horizon) {
  if (scenario.load.empty() || scenario.irradiance.empty()) {
    throw std::invalid_argument("window_average_forecast: empty series");
  }
  const auto spw = static_cast<std::size_t>(scenario.params.plant_steps_per_mpc_step());
  const double p_max = scenario.params.pv.p_max;
  ForecastWindow w;
  for (int j = 0; j < horizon; ++j) {
    const std::size_t first = (mpc_step + static_cast<std::size_t>(j)) * spw;
    double sum_l = 0.0;
    double sum_pv = 0.0;
    for (std::size_t i = first; i < first + spw; ++i) {
      sum_l += scenario.load[std::min(i, scenario.load.size() - 1)];
      sum_pv += pv_available_from_irradiance(scenario.irradiance[std::min(i, scenario.irradiance.size() - 1)], p_max);
    }
    w.w_l.push_back(sum_l / static_cast<double>(spw));
    w.w_pv.push_back(sum_pv / static_cast<double>(spw));
  }
  return w;
}

DispatchResult droop_dispatch(const ControlSetpoints& sp, double w_pv, double w_l, const DroopGains& gains) {
  DispatchResult d;
  d.p_pv = curtailed_pv_output(sp.u_pv, w_pv);
  if (sp.delta_fc == 1) {
    d.mu = (w_l - d.p_pv - sp.u_b - sp.u_fc) / (1.0 / gains.k_b + 1.0 / gains.k_fc);
    d.p_b = sp.u_b + d.mu / gains.k_b;
    d.p_fc = sp.u_fc + d.mu / gains.k_fc;
  } else {
    d.p_fc = 0.0;
    d.p_b = w_l - d.p_pv;
    d.mu = gains.k_b * (d.p_b - sp.u_b);
  }
  d.commanded_p_b = d.p_b;
  return d;
}

LimitedDispatch apply_low_level_limits(const DispatchResult& dispatch, const StoragePolytope& polytope, double x,
                                       const FcParams& fc, int delta_fc, std::size_t step) {
  LimitedDispatch out{dispatch, {}, false};
  const double xc = polytope.clamp_energy(x);
  const PowerBounds bounds = polytope.power_bounds_at(xc);
  const double cmd = dispatch.commanded_p_b;

  const double excess = polytope.violation_magnitude(xc, cmd);
  if (excess > kEventTolerance) {
    const auto kind = cmd > bounds.hi ? ViolationKind::DischargeLimit : ViolationKind::ChargeLimit;
    out.events.push_back({step, x, cmd, excess, kind});
  }
  if (delta_fc != 1) return out;

  DispatchResult& d = out.dispatch;
  d.p_b = std::clamp(cmd, bounds.lo, bounds.hi);
  if (d.p_b == cmd) return out;
  out.clipped = true;
  double p_fc = d.p_fc + (cmd - d.p_b);
  const double served = std::clamp(p_fc, fc.p_min, fc.p_max);
  d.imbalance = p_fc - served;
  d.p_fc = served;
  if (std::abs(d.imbalance) > kEventTolerance) {
    out.events.push_back({step, x, cmd, std::abs(d.imbalance), ViolationKind::FcSaturationImbalance});
  }
  return out;
}

PlantStepResult plant_step(double x, const DispatchResult& dispatch, double dt_h, const StoragePolytope& polytope,
                           std::size_t step) {
  PlantStepResult r;
  const double raw = soc_step(x, dispatch.p_b, dt_h);
  r.x = polytope.clamp_energy(raw);
  r.correction = r.x - raw;
  if (std::abs(r.correction) > kEventTolerance) {
    r.event = ViolationEvent{step, raw, dispatch.p_b, std::abs(r.correction), ViolationKind::EnergyBound};
  }
  return r;
}

SimulationLog run_closed_loop(const Scenario& scenario) {
  validate_scenario(scenario);
  const MicrogridParams& params = scenario.params;
  const StoragePolytope& poly = params.battery.polytope;
  const auto spw = static_cast<std::size_t>(params.plant_steps_per_mpc_step());
  const std::size_t n_mpc = scenario.mpc_steps();
  const bool include_polytope = scenario.mode == ControllerMode::WithPolytope;

  SimulationLog log;
  log.mode = scenario.mode;
  log.x0 = scenario.x0;
  log.dt_plant_h = params.dt_plant_h;
  log.plant.reserve(scenario.plant_steps());
  log.mpc.reserve(n_mpc);

  double x = scenario.x0;
  ControlSetpoints applied;
  applied.delta_fc = scenario.delta_fc0;
  int delta_prev = scenario.delta_fc0;
  const double interval_weight = params.dt_plant_h / params.dt_mpc_h;

  for (std::size_t k = 0; k < n_mpc; ++k) {
    const ForecastWindow window = window_average_forecast(scenario, k, params.horizon_steps);
    const std::vector<Forecast> forecasts = window.forecasts();

    MpcRecord rec;
    rec.mpc_step = k;
    rec.x_measured = poly.clamp_energy(x);
    const auto start = std::chrono::steady_clock::now();
    const MpcProblem problem = build_mpc_problem(params, rec.x_measured, delta_prev, forecasts, include_polytope);
    const MiqpResult sol = solve_miqp(problem.program, scenario.bnb);
    rec.status = sol.status;
    rec.nodes = sol.nodes;
    rec.qp_solves = sol.qp_solves;
    bool accepted = false;
    if ((sol.status == MiqpStatus::Optimal || sol.status == MiqpStatus::NodeLimit) && sol.x.size() > 0) {
      try {
        rec.plan = decode_solution(problem, {sol.x.data(), static_cast<std::size_t>(sol.x.size())}, sol.objective);
        rec.objective = rec.plan.objective;
        applied = first_control(rec.plan);
        accepted = true;
      } catch (const std::runtime_error&) {
        accepted = false;
      }
    }
    rec.held = !accepted;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.mpc.push_back(std::move(rec));

    for (std::size_t i = k * spw; i < (k + 1) * spw; ++i) {
      PlantRecord pr;
      pr.step = i;
      pr.setpoints = applied;
      if (scenario.plant_input == PlantInput::WindowMean) {
        pr.w_l = window.w_l.front();
        pr.w_pv = window.w_pv.front();
      } else {
        pr.w_l = scenario.load[i];
        pr.w_pv = pv_available_from_irradiance(scenario.irradiance[i], params.pv.p_max);
      }
      pr.x = x;
      const DispatchResult raw = droop_dispatch(applied, pr.w_pv, pr.w_l, params.droop);
      const LimitedDispatch limited = apply_low_level_limits(raw, poly, x, params.fc, applied.delta_fc, i);
      pr.dispatch = limited.dispatch;
      pr.clipped = limited.clipped;
      for (const auto& e : limited.events) {
        if (e.kind == ViolationKind::DischargeLimit || e.kind == ViolationKind::ChargeLimit) {
          pr.limit_violation = std::max(pr.limit_violation, e.magnitude);
        }
        log.events.push_back(e);
      }
      const PlantStepResult next = plant_step(x, pr.dispatch, params.dt_plant_h, poly, i);
      if (next.correction != 0.0) log.corrections.push_back({i, next.correction});
      if (next.event) log.events.push_back(*next.event);
      x = next.x;
      pr.x_next = x;

      const int prev = i == k * spw ? delta_prev : applied.delta_fc;
      log.realized_cost += interval_weight * stage_cost(pr.dispatch.p_fc, pr.dispatch.p_b, pr.dispatch.p_pv,
                                                        applied.delta_fc, prev, params.cost, params.pv.p_max);
      log.plant.push_back(pr);
    }
    delta_prev = applied.delta_fc;
  }
  return log;
}

ViolationReport summarize_violations(const std::vector<ViolationEvent>& events, std::size_t total_steps,
                                     double dt_plant_h) {
  ViolationReport r;
  r.total_steps = total_steps;
  std::map<std::size_t, double> per_step;
  for (const auto& e : events) {
    switch (e.kind) {
      case ViolationKind::DischargeLimit:
      case ViolationKind::ChargeLimit: {
        double& m = per_step[e.step];
        m = std::max(m, e.magnitude);
        break;
      }
      case ViolationKind::EnergyBound: ++r.energy_bound_events; break;
      case ViolationKind::FcSaturationImbalance: ++r.imbalance_events; break;
    }
  }
  r.violation_steps = per_step.size();
  r.percentage = total_steps == 0 ? 0.0
                                  : static_cast<double>(r.violation_steps) / static_cast<double>(total_steps) * 100.0;
  r.violation_minutes = static_cast<double>(r.violation_steps) * dt_plant_h * 60.0;
  std::size_t below = 0;
  for (const auto& [step, m] : per_step) {
    r.max_magnitude = std::max(r.max_magnitude, m);
    const auto bin = static_cast<std::size_t>(std::floor(m / ViolationReport::kBinWidth));
    if (r.histogram.size() <= bin) r.histogram.resize(bin + 1, 0);
    ++r.histogram[bin];
    if (m < 0.1) ++below;
  }
  r.fraction_below_0_1 =
      r.violation_steps == 0 ? 0.0 : static_cast<double>(below) / static_cast<double>(r.violation_steps);
  return r;
}

ViolationReport summarize_violations(const SimulationLog& log) {
  return summarize_violations(log.events, log.plant.size(), log.dt_plant_h);
}

}  // namespace mgrid
