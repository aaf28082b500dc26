/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/program.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace mgrid {

enum class QpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(QpStatus status);

struct QpSettings {
  /// Target for primal/dual residuals and the complementarity gap.
  double tolerance = 1e-10;
  /// Residual level below which a stalled solve is still reported optimal.
  double acceptable_residual = 1e-7;
  /// Minimum constraint violation above which a program is declared infeasible.
  double infeasibility_threshold = 1e-7;
  int max_iterations = 100;
};

struct QpResult {
  QpStatus status = QpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_residual = 0.0;
  int iterations = 0;
};

/// Primal-dual interior-point solve (Mehrotra predictor-corrector) of a convex
/// QP. Variables with equal bounds are substituted out first. Infeasibility is
/// decided by a phase-1 solve minimising the largest constraint violation.
/// Throws std::invalid_argument for inconsistent dimensions or an asymmetric
/// Hessian.
QpResult solve_qp(const QuadraticProgram& program, const QpSettings& settings = {});

enum class MiqpStatus { Optimal, Infeasible, Unbounded, NodeLimit };

std::string_view to_string(MiqpStatus status);

struct BnbSettings {
  double integrality_tol = 1e-6;
  double absolute_gap = 1e-6;
  std::size_t node_limit = 100000;
  /// Keep one record per explored node (diagnostics and tests).
  bool record_trace = false;
  QpSettings qp;
};

struct NodeRecord {
  std::size_t id = 0;
  std::size_t parent = 0;  ///< equals id for the root
  QpStatus status = QpStatus::IterationLimit;
  double bound = 0.0;      ///< relaxation objective (meaningful if Optimal)
};

struct MiqpResult {
  MiqpStatus status = MiqpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t nodes = 0;
  std::size_t qp_solves = 0;
  double gap = 0.0;
  std::vector<NodeRecord> trace;
};

/// Best-first branch and bound with most-fractional branching. Deterministic
/// for fixed inputs and settings. On reaching the node limit the best
/// incumbent found so far is returned together with the remaining gap.
MiqpResult solve_miqp(const MixedBinaryQp& program, const BnbSettings& settings = {});

inline constexpr std::size_t kMaxEnumeratedBinaries = 20;

/// Verification oracle: one QP per binary assignment, best feasible kept.
/// Throws std::invalid_argument above kMaxEnumeratedBinaries binaries.
MiqpResult enumerate_miqp(const MixedBinaryQp& program, const QpSettings& settings = {});

}  // namespace mgrid
