/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/model.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace mgrid {

namespace {

constexpr double kStepRatioTol = 1e-9;

std::string describe(const char* what, double value) {
  std::ostringstream os;
  os << what << " (got " << value << ")";
  return os.str();
}

}  // namespace

StoragePolytope reference_native_polytope() {
  constexpr std::array slopes{0.66, 0.28, -0.01, 0.05};
  constexpr std::array intercepts{-4.81, -25.77, -5.21, 19.53};
  return StoragePolytope::from_lines({11.31, 86.5, -5.9, 15.0}, slopes, intercepts);
}

StoragePolytope reference_pu_polytope() {
  return reference_native_polytope().rescale(AffineMap::between(11.31, 86.5, 0.258, 1.972),
                                             AffineMap::between(-5.9, 15.0, -0.59, 1.5));
}

MicrogridParams default_params() {
  return MicrogridParams{PvParams{}, FcParams{}, BatteryParams{reference_pu_polytope()}, DroopGains{},
                         CostCoefficients{}};
}

int MicrogridParams::plant_steps_per_mpc_step() const {
  return static_cast<int>(std::lround(dt_mpc_h / dt_plant_h));
}

double pv_available_from_irradiance(double irradiance, double p_max) {
  if (irradiance < 0.0) return 0.0;
  if (irradiance > 1000.0) return p_max;
  return irradiance / 1000.0 * p_max;
}

double curtailed_pv_output(double u_pv, double w_pv) { return std::min(u_pv, w_pv); }

double soc_step(double x, double p_b, double dt_h) { return x - dt_h * p_b; }

double stage_cost(double p_fc, double p_b, double p_pv, int delta_fc, int delta_fc_prev,
                  const CostCoefficients& c, double p_pv_max) {
  const double curtail = p_pv_max - p_pv;
  const double sw = static_cast<double>(delta_fc - delta_fc_prev);
  return c.c_pv_quad * curtail * curtail + c.c_fc_run_fixed * delta_fc + c.c_fc_run_linear * p_fc +
         c.c_fc_switch * sw * sw + c.c_b_quad * p_b * p_b;
}

ValidationResult validate(const MicrogridParams& p, std::optional<double> typical_load) {
  ValidationResult r;
  auto require = [&](bool cond, std::string msg) {
    if (!cond) r.errors.push_back(std::move(msg));
  };

  require(p.pv.p_min >= 0.0 && p.pv.p_min < p.pv.p_max,
          describe("pv: need 0 <= p_min < p_max", p.pv.p_min));
  require(p.fc.p_min >= 0.0 && p.fc.p_min < p.fc.p_max,
          describe("fc: need 0 <= p_min < p_max", p.fc.p_min));
  require(p.droop.k_b > 0.0, describe("droop: k_b must be positive", p.droop.k_b));
  require(p.droop.k_fc > 0.0, describe("droop: k_fc must be positive", p.droop.k_fc));

  const auto& c = p.cost;
  require(c.c_pv_quad >= 0.0, describe("cost: c_pv_quad must be >= 0", c.c_pv_quad));
  require(c.c_fc_run_fixed >= 0.0, describe("cost: c_fc_run_fixed must be >= 0", c.c_fc_run_fixed));
  require(c.c_fc_run_linear >= 0.0, describe("cost: c_fc_run_linear must be >= 0", c.c_fc_run_linear));
  require(c.c_fc_switch >= 0.0, describe("cost: c_fc_switch must be >= 0", c.c_fc_switch));
  require(c.c_b_quad >= 0.0, describe("cost: c_b_quad must be >= 0", c.c_b_quad));
  require(c.gamma > 0.0 && c.gamma < 1.0, describe("cost: gamma must lie in (0, 1)", c.gamma));

  require(p.horizon_steps >= 1, describe("horizon_steps must be >= 1", p.horizon_steps));
  require(p.base_power_kw > 0.0, describe("base_power_kw must be positive", p.base_power_kw));
  if (p.dt_plant_h > 0.0 && p.dt_mpc_h > 0.0) {
    const double ratio = p.dt_mpc_h / p.dt_plant_h;
    require(std::round(ratio) >= 1.0 && std::abs(ratio - std::round(ratio)) <= kStepRatioTol * ratio,
            describe("dt_mpc_h must be an integer multiple of dt_plant_h", ratio));
  } else {
    r.errors.push_back("dt_mpc_h and dt_plant_h must be positive");
  }

  const auto& box = p.battery.polytope.box();
  if (typical_load && p.pv.p_max > *typical_load && *typical_load > box.p_max) {
    r.warnings.push_back(describe(
        "load sits between the battery discharge limit and the PV rating; expect storage limit violations "
        "unless SoC-dependent limits are enforced",
        *typical_load));
  }
  return r;
}

}  // namespace mgrid
