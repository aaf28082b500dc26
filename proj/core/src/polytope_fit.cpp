/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/polytope.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace mgrid {

namespace {

constexpr double kConcavityTol = 1e-9;
constexpr double kCapTol = 1e-9;
constexpr int kMaxDescentSweeps = 50;

// Internally every envelope is an upper one: min(cap, lines...) fitted to y.
// Charge-side data is mirrored (y = -p) before it reaches this code.
struct Mirrored {
  std::vector<double> x;
  std::vector<double> y;
  double cap = 0.0;
};

struct Candidate {
  std::vector<LimitLine> lines;
  std::vector<double> breakpoints;
  double residual = std::numeric_limits<double>::infinity();
};

double envelope_residual(const Mirrored& data, const std::vector<LimitLine>& lines) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    double v = data.cap;
    for (const auto& l : lines) v = std::min(v, l(data.x[i]));
    const double r = v - data.y[i];
    ssr += r * r;
  }
  return ssr;
}

// Continuous piecewise-affine least squares with fixed breakpoints, written in
// the hinge basis 1, x, (x - b_1)_+, ... Returns nullopt for non-concave fits.
std::optional<Candidate> hinge_fit(const Mirrored& all, const std::vector<double>& rx,
                                   const std::vector<double>& ry,
                                   const std::vector<double>& breakpoints) {
  const auto n = static_cast<Eigen::Index>(rx.size());
  const auto k = static_cast<Eigen::Index>(breakpoints.size());
  Eigen::MatrixXd design(n, 2 + k);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = rx[i];
    for (Eigen::Index m = 0; m < k; ++m) design(i, 2 + m) = std::max(0.0, rx[i] - breakpoints[m]);
    rhs(i) = ry[i];
  }
  const Eigen::MatrixXd normal = design.transpose() * design;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::VectorXd beta = ldlt.solve(design.transpose() * rhs);
  if ((normal * beta - design.transpose() * rhs).lpNorm<Eigen::Infinity>() >
      1e-9 * std::max(1.0, (design.transpose() * rhs).lpNorm<Eigen::Infinity>())) {
    return std::nullopt;
  }

  Candidate c;
  c.breakpoints = breakpoints;
  LimitLine line{beta(1), beta(0)};
  c.lines.push_back(line);
  for (Eigen::Index m = 0; m < k; ++m) {
    const double kink = beta(2 + m);
    if (kink > kConcavityTol) return std::nullopt;
    line.slope += kink;
    line.intercept -= kink * breakpoints[m];
    c.lines.push_back(line);
  }
  c.residual = envelope_residual(all, c.lines);
  return c;
}

std::vector<double> at_indices(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(x[i]);
  return out;
}

bool valid_indices(const std::vector<double>& rx, const std::vector<std::size_t>& idx) {
  for (std::size_t m = 0; m < idx.size(); ++m) {
    if (idx[m] < 1 || idx[m] + 2 > rx.size()) return false;
    if (m > 0 && !(rx[idx[m]] > rx[idx[m - 1]])) return false;
  }
  return true;
}

Candidate search_segments(const Mirrored& all, const std::vector<double>& rx,
                          const std::vector<double>& ry, std::size_t segments) {
  Candidate best;
  if (segments == 1) {
    if (auto c = hinge_fit(all, rx, ry, {})) best = *c;
    return best;
  }

  const std::size_t nb = segments - 1;
  auto evaluate = [&](const std::vector<std::size_t>& idx) -> std::optional<Candidate> {
    if (!valid_indices(rx, idx)) return std::nullopt;
    return hinge_fit(all, rx, ry, at_indices(rx, idx));
  };

  if (segments == 2) {
    for (std::size_t i = 1; i + 1 < rx.size(); ++i) {
      if (auto c = evaluate({i}); c && c->residual < best.residual) best = *c;
    }
    return best;
  }

  // Coordinate descent over breakpoint positions, starting from an even split.
  std::vector<std::size_t> idx(nb);
  for (std::size_t m = 0; m < nb; ++m) idx[m] = (m + 1) * (rx.size() - 1) / segments;
  if (auto c = evaluate(idx)) best = *c;
  for (int sweep = 0; sweep < kMaxDescentSweeps; ++sweep) {
    bool improved = false;
    for (std::size_t m = 0; m < nb; ++m) {
      const std::size_t lo = m == 0 ? 1 : idx[m - 1] + 1;
      const std::size_t hi = m + 1 == nb ? rx.size() - 2 : idx[m + 1] - 1;
      for (std::size_t pos = lo; pos <= hi && pos < rx.size(); ++pos) {
        if (pos == idx[m]) continue;
        auto trial = idx;
        trial[m] = pos;
        if (auto c = evaluate(trial); c && c->residual < best.residual) {
          best = *c;
          idx = trial;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

EnvelopeFit fit_envelope(std::span<const LimitSample> samples, std::size_t segments, LimitSide side,
                         double cap) {
  const double sign = side == LimitSide::DischargeUpper ? 1.0 : -1.0;
  Mirrored all;
  all.cap = sign * cap;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0) {
      if (samples[i].x < samples[i - 1].x) {
        throw std::invalid_argument("fit_envelope: samples must be sorted by x");
      }
      if (samples[i].x == samples[i - 1].x && std::abs(samples[i].p - samples[i - 1].p) > kCapTol) {
        throw std::invalid_argument("fit_envelope: duplicate x with differing power limits");
      }
    }
    all.x.push_back(samples[i].x);
    all.y.push_back(sign * samples[i].p);
  }

  EnvelopeFit out;
  if (segments == 0) {
    out.residual = envelope_residual(all, {});
    return out;
  }
  if (samples.size() < 2 * segments) {
    throw std::invalid_argument("fit_envelope: need at least two samples per segment");
  }

  std::vector<double> rx;
  std::vector<double> ry;
  for (std::size_t i = 0; i < all.x.size(); ++i) {
    if (all.y[i] < all.cap - kCapTol) {
      rx.push_back(all.x[i]);
      ry.push_back(all.y[i]);
    }
  }
  if (rx.size() < 2 * segments) {
    rx = all.x;
    ry = all.y;
  }
  if (rx.front() == rx.back()) {
    throw std::runtime_error("fit_envelope: degenerate data (all samples share one energy value)");
  }

  // Each segment count competes with the best fewer-segment envelope, which
  // makes the reported residual non-increasing in the segment count.
  Candidate best;
  for (std::size_t k = 1; k <= segments; ++k) {
    Candidate c = search_segments(all, rx, ry, k);
    if (c.residual < best.residual) best = std::move(c);
  }
  if (!std::isfinite(best.residual)) {
    throw std::runtime_error("fit_envelope: breakpoint search found no valid envelope");
  }

  for (const auto& l : best.lines) out.lines.push_back({sign * l.slope, sign * l.intercept});
  out.breakpoints = best.breakpoints;
  out.residual = best.residual;
  return out;
}

PolytopeFit fit_polytope(std::span<const LimitSample> upper, std::span<const LimitSample> lower,
                         std::size_t n_upper, std::size_t n_lower, const EnergyPowerBox& box) {
  EnvelopeFit up = fit_envelope(upper, n_upper, LimitSide::DischargeUpper, box.p_max);
  EnvelopeFit lo = fit_envelope(lower, n_lower, LimitSide::ChargeLower, box.p_min);

  std::vector<HalfPlane> planes;
  for (const auto& l : up.lines) planes.push_back({-l.slope, 1.0, l.intercept});
  for (const auto& l : lo.lines) planes.push_back({l.slope, -1.0, -l.intercept});
  return PolytopeFit{std::move(up), std::move(lo), StoragePolytope(box, std::move(planes))};
}

}  // namespace mgrid
