/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mgrid {

double QuadraticProgram::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

double QuadraticProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  if (eq_matrix.rows() > 0) worst = std::max(worst, (eq_matrix * x - eq_rhs).lpNorm<Eigen::Infinity>());
  if (ineq_matrix.rows() > 0) worst = std::max(worst, (ineq_matrix * x - ineq_rhs).maxCoeff());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    worst = std::max({worst, lower(i) - x(i), x(i) - upper(i)});
  }
  return worst;
}

int ProgramBuilder::add_variable(std::string name, double lower, double upper) {
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  return static_cast<int>(names_.size()) - 1;
}

int ProgramBuilder::add_binary(std::string name) {
  const int i = add_variable(std::move(name), 0.0, 1.0);
  binaries_.push_back(i);
  return i;
}

void ProgramBuilder::set_bounds(int i, double lower, double upper) {
  lower_.at(i) = lower;
  upper_.at(i) = upper;
}

void ProgramBuilder::add_le(std::string name, const std::vector<Term>& terms, double rhs) {
  ineq_rows_.push_back({std::move(name), terms, rhs});
}

void ProgramBuilder::add_ge(std::string name, const std::vector<Term>& terms, double rhs) {
  std::vector<Term> neg;
  neg.reserve(terms.size());
  for (const auto& [i, v] : terms) neg.emplace_back(i, -v);
  ineq_rows_.push_back({std::move(name), std::move(neg), -rhs});
}

void ProgramBuilder::add_eq(std::string name, const std::vector<Term>& terms, double rhs) {
  eq_rows_.push_back({std::move(name), terms, rhs});
}

void ProgramBuilder::add_quadratic_cost(int i, int j, double coeff) { quad_.push_back({i, j, coeff}); }

void ProgramBuilder::add_linear_cost(int i, double coeff) { lin_.emplace_back(i, coeff); }

MixedBinaryQp ProgramBuilder::build() const {
  const auto n = static_cast<Eigen::Index>(names_.size());
  MixedBinaryQp out;
  auto& qp = out.qp;
  qp.hessian = Eigen::MatrixXd::Zero(n, n);
  qp.linear = Eigen::VectorXd::Zero(n);
  qp.constant = constant_;
  for (const auto& q : quad_) {
    if (q.i == q.j) {
      qp.hessian(q.i, q.i) += 2.0 * q.coeff;
    } else {
      qp.hessian(q.i, q.j) += q.coeff;
      qp.hessian(q.j, q.i) += q.coeff;
    }
  }
  for (const auto& [i, v] : lin_) qp.linear(i) += v;

  auto fill = [n](const std::vector<Row>& rows, Eigen::MatrixXd& a, Eigen::VectorXd& b,
                  std::vector<std::string>& names) {
    a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
    b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [i, v] : rows[r].terms) a(static_cast<Eigen::Index>(r), i) += v;
      b(static_cast<Eigen::Index>(r)) = rows[r].rhs;
      names.push_back(rows[r].name);
    }
  };
  fill(eq_rows_, qp.eq_matrix, qp.eq_rhs, qp.eq_names);
  fill(ineq_rows_, qp.ineq_matrix, qp.ineq_rhs, qp.ineq_names);

  qp.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
  qp.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
  qp.variable_names = names_;
  out.binaries = binaries_;
  return out;
}

namespace {

std::string var_name(const QuadraticProgram& qp, Eigen::Index i) {
  if (static_cast<std::size_t>(i) < qp.variable_names.size()) return qp.variable_names[i];
  return "x" + std::to_string(i);
}

void dump_row(const QuadraticProgram& qp, std::ostream& os, const Eigen::MatrixXd& a, Eigen::Index r,
              const std::string& name, const char* rel, double rhs) {
  os << name << ":";
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (a(r, j) != 0.0) os << ' ' << (a(r, j) >= 0 ? "+" : "") << a(r, j) << '*' << var_name(qp, j);
  }
  os << ' ' << rel << ' ' << rhs << '\n';
}

}  // namespace

void dump_program(const MixedBinaryQp& program, std::ostream& os) {
  const auto& qp = program.qp;
  const auto n = qp.num_variables();
  std::vector<bool> is_bin(static_cast<std::size_t>(n), false);
  for (auto b : program.binaries) is_bin[static_cast<std::size_t>(b)] = true;

  os << "# variables: " << n << ", equalities: " << qp.eq_matrix.rows()
     << ", inequalities: " << qp.ineq_matrix.rows() << ", binaries: " << program.binaries.size() << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    os << "var " << var_name(qp, i) << " [" << qp.lower(i) << ", " << qp.upper(i) << "]"
       << (is_bin[static_cast<std::size_t>(i)] ? " binary" : "") << '\n';
  }
  os << "objective: constant " << qp.constant << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    if (qp.linear(i) != 0.0) os << "  linear " << qp.linear(i) << '*' << var_name(qp, i) << '\n';
    for (Eigen::Index j = i; j < n; ++j) {
      const double h = qp.hessian(i, j);
      if (h == 0.0) continue;
      const double coeff = i == j ? 0.5 * h : h;
      os << "  quad " << coeff << '*' << var_name(qp, i) << '*' << var_name(qp, j) << '\n';
    }
  }
  for (Eigen::Index r = 0; r < qp.eq_matrix.rows(); ++r) {
    const std::string name = static_cast<std::size_t>(r) < qp.eq_names.size() ? qp.eq_names[r] : "eq" + std::to_string(r);
    dump_row(qp, os, qp.eq_matrix, r, name, "=", qp.eq_rhs(r));
  }
  for (Eigen::Index r = 0; r < qp.ineq_matrix.rows(); ++r) {
    const std::string name =
        static_cast<std::size_t>(r) < qp.ineq_names.size() ? qp.ineq_names[r] : "le" + std::to_string(r);
    dump_row(qp, os, qp.ineq_matrix, r, name, "<=", qp.ineq_rhs(r));
  }
}

}  // namespace mgrid
