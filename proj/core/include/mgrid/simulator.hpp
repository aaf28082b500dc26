/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/formulation.hpp"
#include "mgrid/model.hpp"
#include "mgrid/solver.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace mgrid {

/// Limit exceedances at or below this size are treated as solver round-off.
inline constexpr double kEventTolerance = 1e-6;

enum class ControllerMode { WithPolytope, WithoutPolytope };

/// What the plant sees between controller instants. WindowMean feeds the
/// 30-minute means the prescient controller planned with; Raw feeds the
/// 1-minute series.
enum class PlantInput { WindowMean, Raw };

std::string_view to_string(ControllerMode mode);
std::string_view to_string(PlantInput input);

struct Scenario {
  MicrogridParams params;
  std::vector<double> load;        ///< pu, one entry per plant step
  std::vector<double> irradiance;  ///< W/m^2, one entry per plant step
  double duration_h = 48.0;
  double x0 = 1.5;
  int delta_fc0 = 0;
  ControllerMode mode = ControllerMode::WithPolytope;
  PlantInput plant_input = PlantInput::WindowMean;
  BnbSettings bnb;

  std::size_t plant_steps() const;
  std::size_t mpc_steps() const;
};

/// Throws std::invalid_argument listing every problem found.
void validate_scenario(const Scenario& scenario);

struct DispatchResult {
  double p_fc = 0.0;
  double p_b = 0.0;
  double p_pv = 0.0;
  double mu = 0.0;
  double commanded_p_b = 0.0;
  double imbalance = 0.0;  ///< w_l minus the served sum; positive means unserved load
};

enum class ViolationKind { DischargeLimit, ChargeLimit, EnergyBound, FcSaturationImbalance };

std::string_view to_string(ViolationKind kind);

struct ViolationEvent {
  std::size_t step = 0;
  double x = 0.0;
  double commanded = 0.0;
  double magnitude = 0.0;
  ViolationKind kind = ViolationKind::DischargeLimit;
};

struct ForecastWindow {
  std::vector<double> w_pv;
  std::vector<double> w_l;

  std::vector<Forecast> forecasts() const;
};

/// Window means of the plant-resolution series for controller steps
/// mpc_step .. mpc_step + horizon - 1. Samples past the end repeat the last one.
ForecastWindow window_average_forecast(const Scenario& scenario, std::size_t mpc_step, int horizon);

/// Steady-state droop sharing between the battery and, when enabled, the fuel cell.
DispatchResult droop_dispatch(const ControlSetpoints& setpoints, double w_pv, double w_l, const DroopGains& gains);

struct LimitedDispatch {
  DispatchResult dispatch;
  std::vector<ViolationEvent> events;
  bool clipped = false;
};

/// Battery power limiting of the low-level controls. The battery is clipped
/// only while the fuel cell can take over the residual.
LimitedDispatch apply_low_level_limits(const DispatchResult& dispatch, const StoragePolytope& polytope, double x,
                                       const FcParams& fc, int delta_fc, std::size_t step = 0);

struct PlantStepResult {
  double x = 0.0;
  double correction = 0.0;  ///< clamped x minus unclamped x
  std::optional<ViolationEvent> event;
};

PlantStepResult plant_step(double x, const DispatchResult& dispatch, double dt_h, const StoragePolytope& polytope,
                           std::size_t step = 0);

struct PlantRecord {
  std::size_t step = 0;
  double w_l = 0.0;
  double w_pv = 0.0;
  ControlSetpoints setpoints;
  DispatchResult dispatch;
  double x = 0.0;      ///< state at the start of the step
  double x_next = 0.0;
  bool clipped = false;
  double limit_violation = 0.0;  ///< largest discharge/charge exceedance at this step
};

struct MpcRecord {
  std::size_t mpc_step = 0;
  double x_measured = 0.0;
  MiqpStatus status = MiqpStatus::Infeasible;
  bool held = false;
  std::size_t nodes = 0;
  std::size_t qp_solves = 0;
  double objective = 0.0;
  double wall_seconds = 0.0;
  PlannedTrajectories plan;
};

struct ClampCorrection {
  std::size_t step = 0;
  double amount = 0.0;
};

struct SimulationLog {
  ControllerMode mode = ControllerMode::WithPolytope;
  double x0 = 0.0;
  double dt_plant_h = 0.0;
  std::vector<PlantRecord> plant;
  std::vector<MpcRecord> mpc;
  std::vector<ViolationEvent> events;
  std::vector<ClampCorrection> corrections;
  double realized_cost = 0.0;  ///< stage costs averaged over each controller interval, summed
};

/// Runs the receding-horizon loop. Failed solves keep the previous setpoints.
SimulationLog run_closed_loop(const Scenario& scenario);

struct ViolationReport {
  static constexpr double kBinWidth = 0.05;

  std::size_t violation_steps = 0;
  std::size_t total_steps = 0;
  double percentage = 0.0;
  double violation_minutes = 0.0;
  double max_magnitude = 0.0;
  std::vector<std::size_t> histogram;
  double fraction_below_0_1 = 0.0;
  std::size_t energy_bound_events = 0;
  std::size_t imbalance_events = 0;
};

/// Counts plant steps with a discharge or charge limit event. Each step
/// contributes its largest magnitude to the histogram.
ViolationReport summarize_violations(const std::vector<ViolationEvent>& events, std::size_t total_steps,
                                     double dt_plant_h);
ViolationReport summarize_violations(const SimulationLog& log);

}  // namespace mgrid
