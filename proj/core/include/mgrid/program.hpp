/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mgrid {

/// Dense convex QP
///
///   minimise    0.5 x'Hx + c'x + constant
///   subject to  A_eq x  = b_eq
///               A_in x <= b_in
///               lower <= x <= upper      (entries may be +-infinity)
///
/// Row and variable names are optional and only used for diagnostics.
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::vector<std::string> variable_names;
  std::vector<std::string> eq_names;
  std::vector<std::string> ineq_names;

  Eigen::Index num_variables() const { return linear.size(); }
  double objective(const Eigen::VectorXd& x) const;
  /// Largest violation over equalities, inequalities and bounds (0 if feasible).
  double max_violation(const Eigen::VectorXd& x) const;
};

/// QP whose variables listed in `binaries` must take values in {0, 1}.
struct MixedBinaryQp {
  QuadraticProgram qp;
  std::vector<Eigen::Index> binaries;
};

/// Incremental, row-by-row construction of a MixedBinaryQp.
class ProgramBuilder {
 public:
  using Term = std::pair<int, double>;

  int add_variable(std::string name, double lower, double upper);
  int add_binary(std::string name);

  void add_le(std::string name, const std::vector<Term>& terms, double rhs);
  void add_ge(std::string name, const std::vector<Term>& terms, double rhs);
  void add_eq(std::string name, const std::vector<Term>& terms, double rhs);

  /// objective += coeff * x_i * x_j
  void add_quadratic_cost(int i, int j, double coeff);
  void add_linear_cost(int i, double coeff);
  void add_constant_cost(double value) { constant_ += value; }

  void set_bounds(int i, double lower, double upper);

  int variable_count() const { return static_cast<int>(names_.size()); }
  int eq_count() const { return static_cast<int>(eq_rows_.size()); }
  int ineq_count() const { return static_cast<int>(ineq_rows_.size()); }

  MixedBinaryQp build() const;

 private:
  struct Row {
    std::string name;
    std::vector<Term> terms;
    double rhs = 0.0;
  };
  struct Quad {
    int i;
    int j;
    double coeff;
  };

  std::vector<std::string> names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Eigen::Index> binaries_;
  std::vector<Row> eq_rows_;
  std::vector<Row> ineq_rows_;
  std::vector<Quad> quad_;
  std::vector<Term> lin_;
  double constant_ = 0.0;
};

/// Human-readable listing: one variable or constraint per line.
void dump_program(const MixedBinaryQp& program, std::ostream& os);

}  // namespace mgrid
