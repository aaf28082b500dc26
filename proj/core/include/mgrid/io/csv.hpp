/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/polytope.hpp"
#include "mgrid/simulator.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mgrid::io {

struct TimeseriesOptions {
  double dt_plant_min = 1.0;
  std::size_t steps = 0;  ///< samples to produce on the plant grid
  double divide_by = 1.0; ///< e.g. the base power to turn kW into pu
};

/// Reads a `t_min,value` series with strictly increasing integer minutes and
/// resamples it onto the plant grid by zero-order hold. Grid points before the
/// first row take the first value. Throws std::runtime_error with the offending
/// line number on malformed input.
std::vector<double> load_timeseries_csv(std::istream& in, const TimeseriesOptions& options);
std::vector<double> load_timeseries_csv(const std::filesystem::path& path, const TimeseriesOptions& options);

/// Reads `x,p,side` rows with side U (discharge limit) or L (charge limit).
std::vector<LimitSample> read_limit_samples(std::istream& in);
std::vector<LimitSample> read_limit_samples(const std::filesystem::path& path);

inline constexpr const char* kTrajectoryHeader =
    "t_min,w_l,w_pv,u_fc,u_b,u_pv,delta_fc,p_fc,p_b,p_pv,x,mu,violation";

/// One row per plant step; x is the state at the start of the step.
void write_trajectory_csv(const SimulationLog& log, std::ostream& out);

}  // namespace mgrid::io
