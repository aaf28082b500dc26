/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/simulator.hpp"

#include <cstdint>

namespace mgrid::io {

struct SyntheticSettings {
  std::uint64_t seed = 7;
  double duration_h = 48.0;
  double noise = 0.05;  ///< relative amplitude of the 1-minute load noise
};

/// Two-day style test profile: clipped-sinusoid irradiance whose daily peak
/// saturates the PV unit, and a morning/evening double-peak load that sits
/// between the battery and PV power ratings, with seeded uniform noise.
Scenario generate_synthetic_scenario(const SyntheticSettings& settings, const MicrogridParams& params);

}  // namespace mgrid::io
