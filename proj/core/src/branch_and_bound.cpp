/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace mgrid {

std::string_view to_string(MiqpStatus status) {
  switch (status) {
    case MiqpStatus::Optimal: return "optimal";
    case MiqpStatus::Infeasible: return "infeasible";
    case MiqpStatus::Unbounded: return "unbounded";
    case MiqpStatus::NodeLimit: return "node-limit";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFaceTolerance = 1e-9;

struct Node {
  std::size_t id = 0;
  std::size_t parent = 0;
  double bound = -kInf;  // parent's relaxation objective
  std::vector<double> lower;
  std::vector<double> upper;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

void check_binaries(const MixedBinaryQp& program) {
  const auto n = program.qp.num_variables();
  for (auto b : program.binaries) {
    if (b < 0 || b >= n) throw std::invalid_argument("binary index out of range");
    if (program.qp.lower(b) < 0.0 || program.qp.upper(b) > 1.0) {
      throw std::invalid_argument("binary variables must have bounds within [0, 1]");
    }
  }
}

QuadraticProgram with_binary_bounds(const MixedBinaryQp& program, const std::vector<double>& lower,
                                    const std::vector<double>& upper) {
  QuadraticProgram qp = program.qp;
  for (std::size_t k = 0; k < program.binaries.size(); ++k) {
    qp.lower(program.binaries[k]) = lower[k];
    qp.upper(program.binaries[k]) = upper[k];
  }
  return qp;
}

double fractionality(double v) { return std::abs(v - std::round(v)); }

// Interior-point relaxations land in the middle of degenerate optimal faces,
// leaving binaries fractional that the objective does not care about. Walk
// the fractional binaries (most fractional first) and fix each to its
// rounding whenever that leaves the relaxation value unchanged. The result is
// another optimum of the same relaxation, so bounds are unaffected.
QpResult settle_on_face(const MixedBinaryQp& program, std::vector<double> lower, std::vector<double> upper,
                        QpResult rel, const BnbSettings& settings, std::size_t& qp_solves) {
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < program.binaries.size(); ++k) {
    if (fractionality(rel.x(program.binaries[k])) > settings.integrality_tol) order.push_back(k);
  }
  if (order.size() < 2) return rel;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fractionality(rel.x(program.binaries[a])) > fractionality(rel.x(program.binaries[b]));
  });
  const double limit = rel.objective + kFaceTolerance * (1.0 + std::abs(rel.objective));
  for (std::size_t k : order) {
    const double v = rel.x(program.binaries[k]);
    if (fractionality(v) <= settings.integrality_tol) continue;
    const double target = std::round(v);
    const double old_lower = lower[k];
    const double old_upper = upper[k];
    lower[k] = upper[k] = target;
    const QpResult trial = solve_qp(with_binary_bounds(program, lower, upper), settings.qp);
    ++qp_solves;
    if (trial.status == QpStatus::Optimal && trial.objective <= limit) {
      rel.x = trial.x;
    } else {
      lower[k] = old_lower;
      upper[k] = old_upper;
    }
  }
  return rel;
}

}  // namespace

MiqpResult solve_miqp(const MixedBinaryQp& program, const BnbSettings& settings) {
  check_binaries(program);
  const std::size_t nb = program.binaries.size();

  MiqpResult result;
  double incumbent = kInf;

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  Node root;
  for (auto b : program.binaries) {
    root.lower.push_back(program.qp.lower(b));
    root.upper.push_back(program.qp.upper(b));
  }
  open.push(root);
  std::size_t next_id = 1;
  bool hit_limit = false;

  while (!open.empty()) {
    if (result.nodes >= settings.node_limit) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent - settings.absolute_gap) continue;

    const QuadraticProgram relaxed = with_binary_bounds(program, node.lower, node.upper);
    const QpResult rel = solve_qp(relaxed, settings.qp);
    ++result.nodes;
    ++result.qp_solves;
    if (settings.record_trace) result.trace.push_back({node.id, node.parent, rel.status, rel.objective});

    if (rel.status == QpStatus::Unbounded) {
      result.status = MiqpStatus::Unbounded;
      result.x = rel.x;
      return result;
    }
    if (rel.status != QpStatus::Optimal) continue;
    if (rel.objective >= incumbent - settings.absolute_gap) continue;
    const QpResult face = settle_on_face(program, node.lower, node.upper, rel, settings, result.qp_solves);

    // Most fractional binary; ties go to the lowest index.
    std::size_t branch = nb;
    double worst = settings.integrality_tol;
    for (std::size_t k = 0; k < nb; ++k) {
      const double v = face.x(program.binaries[k]);
      const double frac = std::abs(v - std::round(v));
      if (frac > worst) {
        worst = frac;
        branch = k;
      }
    }

    if (nb == 0) {
      incumbent = rel.objective;
      result.x = rel.x;
      continue;
    }

    // Rounding the relaxation either polishes an integral point or, on the
    // degenerate faces an interior-point solution tends to sit on, often
    // yields an incumbent that closes the node outright.
    std::vector<double> fixed(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      fixed[k] = std::clamp(std::round(face.x(program.binaries[k])), node.lower[k], node.upper[k]);
    }
    const QpResult rounded = solve_qp(with_binary_bounds(program, fixed, fixed), settings.qp);
    ++result.qp_solves;
    if (rounded.status == QpStatus::Optimal && rounded.objective < incumbent) {
      incumbent = rounded.objective;
      result.x = rounded.x;
    }
    if (branch == nb || rel.objective >= incumbent - settings.absolute_gap) continue;

    Node down{next_id++, node.id, rel.objective, node.lower, node.upper};
    down.upper[branch] = 0.0;
    Node up{next_id++, node.id, rel.objective, node.lower, node.upper};
    up.lower[branch] = 1.0;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  double best_bound = incumbent;
  while (!open.empty()) {
    best_bound = std::min(best_bound, open.top().bound);
    open.pop();
  }

  if (std::isfinite(incumbent)) {
    result.objective = incumbent;
    result.gap = std::max(0.0, incumbent - best_bound);
    result.status = hit_limit && result.gap > settings.absolute_gap ? MiqpStatus::NodeLimit : MiqpStatus::Optimal;
  } else {
    result.status = hit_limit ? MiqpStatus::NodeLimit : MiqpStatus::Infeasible;
    result.gap = kInf;
  }
  return result;
}

MiqpResult enumerate_miqp(const MixedBinaryQp& program, const QpSettings& settings) {
  check_binaries(program);
  const std::size_t nb = program.binaries.size();
  if (nb > kMaxEnumeratedBinaries) {
    throw std::invalid_argument("enumerate_miqp: too many binaries to enumerate");
  }

  MiqpResult result;
  double best = kInf;
  const std::size_t count = std::size_t{1} << nb;
  std::vector<double> fixed(nb);
  for (std::size_t mask = 0; mask < count; ++mask) {
    bool admissible = true;
    for (std::size_t k = 0; k < nb; ++k) {
      fixed[k] = static_cast<double>((mask >> k) & 1U);
      const auto b = program.binaries[k];
      admissible = admissible && fixed[k] >= program.qp.lower(b) && fixed[k] <= program.qp.upper(b);
    }
    ++result.nodes;
    if (!admissible) continue;
    const QpResult r = solve_qp(with_binary_bounds(program, fixed, fixed), settings);
    ++result.qp_solves;
    if (r.status == QpStatus::Unbounded) {
      result.status = MiqpStatus::Unbounded;
      result.x = r.x;
      return result;
    }
    if (r.status == QpStatus::Optimal && r.objective < best) {
      best = r.objective;
      result.x = r.x;
    }
  }
  result.status = std::isfinite(best) ? MiqpStatus::Optimal : MiqpStatus::Infeasible;
  result.objective = std::isfinite(best) ? best : 0.0;
  return result;
}

}  // namespace mgrid
