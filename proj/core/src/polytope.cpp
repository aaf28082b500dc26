/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mgrid {

namespace {

constexpr int kNonEmptyGrid = 100;

HalfPlane normalised(const HalfPlane& h) {
  const double scale = h.b != 0.0 ? std::abs(h.b) : std::abs(h.a);
  return {h.a / scale, h.b / scale, h.c / scale};
}

void check_map(const AffineMap& m, const char* which) {
  const bool ok = std::isfinite(m.src0) && std::isfinite(m.src1) && std::isfinite(m.dst0) &&
                  std::isfinite(m.dst1) && m.src0 < m.src1 && m.dst0 < m.dst1;
  if (!ok) {
    throw std::invalid_argument(std::string("rescale: ") + which + " map must be strictly increasing");
  }
}

}  // namespace

StoragePolytope::StoragePolytope(EnergyPowerBox box, std::vector<HalfPlane> planes) : box_(box) {
  if (!(box.x_min < box.x_max) || !(box.p_min < box.p_max)) {
    throw std::invalid_argument("storage polytope: box must satisfy x_min < x_max and p_min < p_max");
  }
  planes_.reserve(planes.size());
  for (const auto& h : planes) {
    if (h.a == 0.0 && h.b == 0.0) {
      throw std::invalid_argument("storage polytope: half-plane with (a, b) = (0, 0)");
    }
    if (!std::isfinite(h.a) || !std::isfinite(h.b) || !std::isfinite(h.c)) {
      throw std::invalid_argument("storage polytope: non-finite half-plane coefficient");
    }
    planes_.push_back(normalised(h));
  }

  // Every plane is affine in x, so zero power holds along the whole box edge
  // iff it holds at both ends.
  if (box_.p_min > kContainmentTol || box_.p_max < -kContainmentTol) {
    throw std::invalid_argument("storage polytope: zero power outside [p_min, p_max]");
  }
  for (const auto& h : planes_) {
    if (h.evaluate(box_.x_min, 0.0) > kContainmentTol || h.evaluate(box_.x_max, 0.0) > kContainmentTol) {
      throw std::invalid_argument("storage polytope: zero power is not admissible over the whole energy range");
    }
  }

  bool any = false;
  for (int i = 0; i < kNonEmptyGrid && !any; ++i) {
    const double x = box_.x_min + (box_.x_max - box_.x_min) * i / (kNonEmptyGrid - 1);
    for (int j = 0; j < kNonEmptyGrid; ++j) {
      const double p = box_.p_min + (box_.p_max - box_.p_min) * j / (kNonEmptyGrid - 1);
      if (contains(x, p)) {
        any = true;
        break;
      }
    }
  }
  if (!any) throw std::invalid_argument("storage polytope: admissible set is empty");
}

StoragePolytope StoragePolytope::from_lines(const EnergyPowerBox& box, std::span<const double> slopes,
                                            std::span<const double> intercepts) {
  if (slopes.size() != intercepts.size()) {
    throw std::invalid_argument("from_lines: slope and intercept counts differ");
  }
  const double mid = 0.5 * (box.x_min + box.x_max);
  std::vector<HalfPlane> planes;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    const double s = slopes[i];
    const double q = intercepts[i];
    const double at_lo = s * box.x_min + q;
    const double at_hi = s * box.x_max + q;
    if (s * mid + q >= 0.0) {
      if (std::min(at_lo, at_hi) >= box.p_max) continue;  // never below the discharge cap
      planes.push_back({-s, 1.0, q});
    } else {
      if (std::max(at_lo, at_hi) <= box.p_min) continue;  // never above the charge cap
      planes.push_back({s, -1.0, -q});
    }
  }
  return StoragePolytope(box, std::move(planes));
}

bool StoragePolytope::contains(double x, double p) const {
  if (x < box_.x_min - kContainmentTol || x > box_.x_max + kContainmentTol) return false;
  if (p < box_.p_min - kContainmentTol || p > box_.p_max + kContainmentTol) return false;
  return std::all_of(planes_.begin(), planes_.end(),
                     [&](const HalfPlane& h) { return h.evaluate(x, p) <= kContainmentTol; });
}

double StoragePolytope::clamp_energy(double x) const { return std::clamp(x, box_.x_min, box_.x_max); }

PowerBounds StoragePolytope::power_bounds_at(double x) const {
  if (!(x >= box_.x_min - kContainmentTol && x <= box_.x_max + kContainmentTol)) {
    throw std::out_of_range("power_bounds_at: energy " + std::to_string(x) + " outside [" +
                            std::to_string(box_.x_min) + ", " + std::to_string(box_.x_max) + "]");
  }
  const double xc = clamp_energy(x);
  PowerBounds bounds{box_.p_min, box_.p_max};
  for (const auto& h : planes_) {
    if (h.b > 0.0) {
      bounds.hi = std::min(bounds.hi, (h.c - h.a * xc) / h.b);
    } else if (h.b < 0.0) {
      bounds.lo = std::max(bounds.lo, (h.c - h.a * xc) / h.b);
    }
  }
  return bounds;
}

double StoragePolytope::violation_magnitude(double x, double p) const {
  const double xc = clamp_energy(x);
  if (contains(xc, p)) return 0.0;
  const PowerBounds b = power_bounds_at(xc);
  return std::max({p - b.hi, b.lo - p, 0.0});
}

StoragePolytope StoragePolytope::rescale(const AffineMap& x_map, const AffineMap& p_map) const {
  check_map(x_map, "energy");
  check_map(p_map, "power");
  const double sx = x_map.slope();
  const double sp = p_map.slope();

  EnergyPowerBox box{x_map(box_.x_min), x_map(box_.x_max), p_map(box_.p_min), p_map(box_.p_max)};

  // x = src0 + (X - dst0)/sx, likewise for p.
  std::vector<HalfPlane> planes;
  planes.reserve(planes_.size());
  for (const auto& h : planes_) {
    HalfPlane out;
    out.a = h.a / sx;
    out.b = h.b / sp;
    out.c = h.c - h.a * (x_map.src0 - x_map.dst0 / sx) - h.b * (p_map.src0 - p_map.dst0 / sp);
    planes.push_back(out);
  }
  return StoragePolytope(box, std::move(planes));
}

}  // namespace mgrid
