/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mgrid {

/// Absolute tolerance used by every containment comparison.
inline constexpr double kContainmentTol = 1e-9;

/// Half-plane a*x + b*p <= c in the (energy, power) plane.
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double evaluate(double x, double p) const { return a * x + b * p - c; }
  bool is_upper() const { return b > 0.0; }
  bool is_lower() const { return b < 0.0; }
};

struct EnergyPowerBox {
  double x_min = 0.0;
  double x_max = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
};

struct PowerBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Strictly increasing affine map sending [src0, src1] onto [dst0, dst1].
/// Both interval endpoints are reproduced bit-exactly.
struct AffineMap {
  double src0 = 0.0;
  double src1 = 1.0;
  double dst0 = 0.0;
  double dst1 = 1.0;

  static AffineMap identity() { return {}; }
  static AffineMap between(double src0, double src1, double dst0, double dst1) {
    return {src0, src1, dst0, dst1};
  }

  double slope() const { return (dst1 - dst0) / (src1 - src0); }
  double operator()(double v) const {
    if (v == src1) return dst1;
    return dst0 + (v - src0) * slope();
  }
};

/// Convex set of admissible battery (energy, power) pairs in H-representation:
/// a box intersected with oriented half-planes. Immutable once built.
///
/// Planes are normalised on construction so that |b| = 1 whenever b != 0; an
/// upper (discharge) plane then reads p <= c - a*x and a lower (charge) plane
/// reads p >= a*x - c.
class StoragePolytope {
 public:
  /// Throws std::invalid_argument if the box is degenerate, a plane has
  /// (a, b) = (0, 0), zero power is inadmissible somewhere on [x_min, x_max],
  /// or the sampled set is empty.
  StoragePolytope(EnergyPowerBox box, std::vector<HalfPlane> planes);

  /// Builds a polytope from lines p = slope*x + intercept. Each line becomes an
  /// upper bound when its value at the box midpoint is >= 0 and a lower bound
  /// otherwise; lines that never cut into the box are dropped.
  static StoragePolytope from_lines(const EnergyPowerBox& box, std::span<const double> slopes,
                                    std::span<const double> intercepts);

  const EnergyPowerBox& box() const { return box_; }
  std::span<const HalfPlane> planes() const { return planes_; }

  bool contains(double x, double p) const;

  /// Admissible power interval at energy x. Throws std::out_of_range when x is
  /// outside [x_min, x_max] by more than the containment tolerance.
  PowerBounds power_bounds_at(double x) const;

  /// One-dimensional power exceedance at fixed energy; x is clamped into the box.
  double violation_magnitude(double x, double p) const;

  /// Image of the polytope under (x, p) -> (x_map(x), p_map(p)).
  StoragePolytope rescale(const AffineMap& x_map, const AffineMap& p_map) const;

  double clamp_energy(double x) const;

 private:
  EnergyPowerBox box_;
  std::vector<HalfPlane> planes_;
};

// ---------------------------------------------------------------------------
// Fitting

enum class LimitSide { DischargeUpper, ChargeLower };

struct LimitSample {
  double x = 0.0;
  double p = 0.0;
  LimitSide side = LimitSide::DischargeUpper;
};

/// Line p = slope*x + intercept.
struct LimitLine {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

/// One fitted envelope side. For the discharge side the envelope is
/// min(cap, lines...); for the charge side it is max(cap, lines...).
struct EnvelopeFit {
  std::vector<LimitLine> lines;
  std::vector<double> breakpoints;
  double residual = 0.0;  ///< sum of squared residuals over all samples
};

struct PolytopeFit {
  EnvelopeFit upper;
  EnvelopeFit lower;
  StoragePolytope polytope;

  double residual() const { return upper.residual + lower.residual; }
};

/// Least-squares fit of a concave (upper) or convex (lower) continuous
/// piecewise-affine envelope with the given number of segments. Breakpoints
/// are scanned exhaustively over sample positions for up to two segments and
/// refined by coordinate descent beyond that. Samples lying on the box cap are
/// explained by the cap and excluded from the line regression as long as at
/// least two samples per segment remain below it.
///
/// Throws std::invalid_argument on unsorted or insufficient samples and
/// std::runtime_error when the data admit no valid envelope.
EnvelopeFit fit_envelope(std::span<const LimitSample> samples, std::size_t segments,
                         LimitSide side, double cap);

PolytopeFit fit_polytope(std::span<const LimitSample> upper, std::span<const LimitSample> lower,
                         std::size_t n_upper, std::size_t n_lower, const EnergyPowerBox& box);

}  // namespace mgrid
