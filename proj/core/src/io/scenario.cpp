/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mgrid::io {

namespace {

// Daily shapes; hour-of-day in [0, 24).
double irradiance_at(double hour, int day) {
  const double peak = day % 2 == 0 ? 1150.0 : 1080.0;
  const double s = std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
  return hour > 6.0 && hour < 18.0 ? peak * s : 0.0;
}

double load_at(double hour) {
  auto bump = [hour](double centre, double width) {
    const double z = (hour - centre) / width;
    return std::exp(-0.5 * z * z);
  };
  return 1.0 + 0.9 * bump(8.0, 1.5) + 1.7 * bump(19.5, 2.0);
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Scenario generate_synthetic_scenario(const SyntheticSettings& settings, const MicrogridParams& params) {
  const double windows = settings.duration_h / params.dt_mpc_h;
  if (!(settings.duration_h > 0.0) || std::abs(windows - std::round(windows)) > 1e-9) {
    throw std::invalid_argument("synthetic scenario: duration must be a positive multiple of the controller step");
  }
  Scenario s;
  s.params = params;
  s.duration_h = settings.duration_h;
  const auto n = s.plant_steps();
  s.load.resize(n);
  s.irradiance.resize(n);
  std::mt19937_64 rng(settings.seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * params.dt_plant_h;
    const int day = static_cast<int>(std::floor(t / 24.0));
    const double hour = t - 24.0 * day;
    s.irradiance[i] = irradiance_at(hour, day);
    s.load[i] = load_at(hour) * (1.0 + settings.noise * (2.0 * unit(rng) - 1.0));
  }
  return s;
}

}  // namespace mgrid::io
