/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Shared reference data and brute-force helpers for the test programs. The
// helpers deliberately evaluate the raw line parameters rather than going
// through the library, so they can serve as independent oracles.

#include "mgrid/polytope.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>

namespace fixture {

// Measured battery limits: lines p = slope*x + intercept in kW over an energy
// axis from 11.31 to 86.5, power box [-5.9, 15].
inline constexpr std::array<double, 4> kSlopes{0.66, 0.28, -0.01, 0.05};
inline constexpr std::array<double, 4> kIntercepts{-4.81, -25.77, -5.21, 19.53};
inline constexpr mgrid::EnergyPowerBox kNativeBox{11.31, 86.5, -5.9, 15.0};
inline constexpr mgrid::EnergyPowerBox kPuBox{0.258, 1.972, -0.59, 1.5};

inline double line(std::size_t i, double x) { return kSlopes[i] * x + kIntercepts[i]; }

// A line limits discharge when it is non-negative at mid-range energy and
// charge otherwise.
inline bool is_discharge_line(std::size_t i) {
  return line(i, 0.5 * (kNativeBox.x_min + kNativeBox.x_max)) >= 0.0;
}

inline double native_p_hi(double x) {
  double hi = kNativeBox.p_max;
  for (std::size_t i = 0; i < kSlopes.size(); ++i) {
    if (is_discharge_line(i)) hi = std::min(hi, line(i, x));
  }
  return hi;
}

inline double native_p_lo(double x) {
  double lo = kNativeBox.p_min;
  for (std::size_t i = 0; i < kSlopes.size(); ++i) {
    if (!is_discharge_line(i)) lo = std::max(lo, line(i, x));
  }
  return lo;
}

inline bool native_contains(double x, double p, double tol = 1e-9) {
  if (x < kNativeBox.x_min - tol || x > kNativeBox.x_max + tol) return false;
  return p >= native_p_lo(x) - tol && p <= native_p_hi(x) + tol;
}

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int bit() { return static_cast<int>(engine_() & 1U); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fixture
