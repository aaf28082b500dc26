/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/polytope.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mgrid {

/// Photovoltaic output limits in pu.
struct PvParams {
  double p_min = 0.0;
  double p_max = 4.5;
};

/// Fuel-cell output limits in pu while switched on.
struct FcParams {
  double p_min = 0.2;
  double p_max = 4.5;
};

/// Battery limits fitted to the 11.6 kWh lithium-ion unit, in measurement units
/// (energy on the recorded axis, power in kW).
StoragePolytope reference_native_polytope();

/// reference_native_polytope() expressed in pu and pu*h on a 10 kW base.
StoragePolytope reference_pu_polytope();

struct BatteryParams {
  StoragePolytope polytope = reference_pu_polytope();
};

/// Droop gains of the two grid-forming units.
struct DroopGains {
  double k_b = 1.0;
  double k_fc = 1.0;
};

struct CostCoefficients {
  double c_pv_quad = 1.0;         // curtailment penalty
  double c_fc_run_fixed = 0.13;   // per step the fuel cell is on
  double c_fc_run_linear = 4.56;  // per pu of fuel-cell output
  double c_fc_switch = 0.2;       // per on/off transition
  double c_b_quad = 0.1;          // battery conversion losses
  double gamma = 0.9;             // horizon discount
};

struct MicrogridParams {
  PvParams pv;
  FcParams fc;
  BatteryParams battery;
  DroopGains droop;
  CostCoefficients cost;
  double dt_mpc_h = 0.5;
  double dt_plant_h = 1.0 / 60.0;
  int horizon_steps = 6;
  double base_power_kw = 10.0;

  /// Number of plant steps per controller step (assumes validate() passed).
  int plant_steps_per_mpc_step() const;
};

/// The shipped default parameter set.
MicrogridParams default_params();

struct UnitState {
  double x = 1.5;
  int delta_fc_prev = 0;
};

/// Setpoints handed from the controller to the plant for one control interval.
struct ControlSetpoints {
  double u_fc = 0.0;
  double u_b = 0.0;
  double u_pv = 0.0;
  int delta_fc = 0;
};

/// Available PV power from irradiance in W/m^2, saturating at 1000 W/m^2.
double pv_available_from_irradiance(double irradiance, double p_max);

/// Curtailed PV output.
double curtailed_pv_output(double u_pv, double w_pv);

/// Lossless energy update x - dt*p_b (discharge positive).
double soc_step(double x, double p_b, double dt_h);

double stage_cost(double p_fc, double p_b, double p_pv, int delta_fc, int delta_fc_prev,
                  const CostCoefficients& coeffs, double p_pv_max);

struct ValidationResult {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// Checks every parameter invariant and reports all violations at once. When a
/// typical load is supplied, flags the p_PV,max > load > p_B,max ordering that
/// is known to provoke storage limit violations.
ValidationResult validate(const MicrogridParams& params,
                          std::optional<double> typical_load = std::nullopt);

}  // namespace mgrid
