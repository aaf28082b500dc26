/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/simulator.hpp"

#include <iosfwd>

namespace mgrid::io {

/// Stacked panels of fuel-cell, battery and PV power and stored energy over
/// time. The battery panel shades the admissible power band and marks limit
/// violations with crosses.
void render_trajectory_svg(const SimulationLog& log, const StoragePolytope& polytope, std::ostream& out);

/// Histogram of violation magnitudes.
void render_violation_histogram_svg(const ViolationReport& report, std::ostream& out);

}  // namespace mgrid::io
