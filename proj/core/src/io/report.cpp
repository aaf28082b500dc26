/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/report.hpp"

#include "mgrid/io/format.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mgrid::io {

using nlohmann::ordered_json;

SolveStatistics solve_statistics(const SimulationLog& log) {
  SolveStatistics s;
  s.solves = log.mpc.size();
  double nodes = 0.0;
  double wall = 0.0;
  for (const auto& r : log.mpc) {
    nodes += static_cast<double>(r.nodes);
    wall += r.wall_seconds;
    s.max_nodes = std::max(s.max_nodes, r.nodes);
    s.max_wall_seconds = std::max(s.max_wall_seconds, r.wall_seconds);
    if (r.held) ++s.held;
  }
  if (s.solves > 0) {
    s.mean_nodes = nodes / static_cast<double>(s.solves);
    s.mean_wall_seconds = wall / static_cast<double>(s.solves);
  }
  return s;
}

void write_report_json(const SimulationLog& log, const ViolationReport& report, std::ostream& out) {
  const SolveStatistics stats = solve_statistics(log);
  double discounted = 0.0;
  for (const auto& r : log.mpc) discounted += r.objective;

  ordered_json j;
  j["mode"] = std::string(to_string(log.mode));
  j["plant_steps"] = log.plant.size();
  j["violations"] = {
      {"violation_steps", report.violation_steps},
      {"total_steps", report.total_steps},
      {"percentage", report.percentage},
      {"violation_minutes", report.violation_minutes},
      {"max_magnitude_pu", report.max_magnitude},
      {"fraction_below_0_1", report.fraction_below_0_1},
      {"histogram", {{"bin_width_pu", ViolationReport::kBinWidth}, {"counts", report.histogram}}},
      {"energy_bound_events", report.energy_bound_events},
      {"imbalance_events", report.imbalance_events},
  };
  j["solver"] = {
      {"mpc_solves", stats.solves},
      {"held_setpoints", stats.held},
      {"mean_nodes", stats.mean_nodes},
      {"max_nodes", stats.max_nodes},
  };
  j["cost"] = {{"total_discounted_cost", discounted}, {"realized_cost", log.realized_cost}};
  j["final_x"] = log.plant.empty() ? log.x0 : log.plant.back().x_next;
  out << j.dump(2) << '\n';
}

void write_timing_json(const SimulationLog& log, std::ostream& out) {
  const SolveStatistics stats = solve_statistics(log);
  ordered_json j;
  j["mode"] = std::string(to_string(log.mode));
  j["mean_solve_seconds"] = stats.mean_wall_seconds;
  j["max_solve_seconds"] = stats.max_wall_seconds;
  j["total_solve_seconds"] = stats.mean_wall_seconds * static_cast<double>(stats.solves);
  out << j.dump(2) << '\n';
}

ReportSummary read_report_json(std::istream& in) {
  ReportSummary s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.mode = j.at("mode").get<std::string>();
    const auto& v = j.at("violations");
    s.violations.violation_steps = v.at("violation_steps").get<std::size_t>();
    s.violations.total_steps = v.at("total_steps").get<std::size_t>();
    s.violations.percentage = v.at("percentage").get<double>();
    s.violations.violation_minutes = v.at("violation_minutes").get<double>();
    s.violations.max_magnitude = v.at("max_magnitude_pu").get<double>();
    s.violations.fraction_below_0_1 = v.at("fraction_below_0_1").get<double>();
    s.violations.histogram = v.at("histogram").at("counts").get<std::vector<std::size_t>>();
    s.violations.energy_bound_events = v.at("energy_bound_events").get<std::size_t>();
    s.violations.imbalance_events = v.at("imbalance_events").get<std::size_t>();
    s.total_discounted_cost = j.at("cost").at("total_discounted_cost").get<double>();
    s.realized_cost = j.at("cost").at("realized_cost").get<double>();
    s.mean_nodes = j.at("solver").at("mean_nodes").get<double>();
    s.held = j.at("solver").at("held_setpoints").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
  return s;
}

ReportSummary read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_report_json(in);
}

void write_comparison(const ReportSummary& a, const ReportSummary& b, std::ostream& out) {
  auto row = [&](const std::string& name, const std::string& va, const std::string& vb) {
    out << std::left << std::setw(26) << name << std::setw(20) << va << vb << '\n';
  };
  auto num = [](double v) { return format_number(v); };
  auto cnt = [](std::size_t v) { return std::to_string(v); };
  row("", a.mode, b.mode);
  row("violation steps", cnt(a.violations.violation_steps), cnt(b.violations.violation_steps));
  row("total steps", cnt(a.violations.total_steps), cnt(b.violations.total_steps));
  row("violation %", format_fixed(a.violations.percentage, 2), format_fixed(b.violations.percentage, 2));
  row("violation minutes", num(a.violations.violation_minutes), num(b.violations.violation_minutes));
  row("max magnitude [pu]", format_fixed(a.violations.max_magnitude, 4), format_fixed(b.violations.max_magnitude, 4));
  row("fraction below 0.1 pu", format_fixed(a.violations.fraction_below_0_1, 3),
      format_fixed(b.violations.fraction_below_0_1, 3));
  row("energy-bound events", cnt(a.violations.energy_bound_events), cnt(b.violations.energy_bound_events));
  row("imbalance events", cnt(a.violations.imbalance_events), cnt(b.violations.imbalance_events));
  row("discounted cost", format_fixed(a.total_discounted_cost, 3), format_fixed(b.total_discounted_cost, 3));
  row("realized cost", format_fixed(a.realized_cost, 3), format_fixed(b.realized_cost, 3));
  row("mean B&B nodes", format_fixed(a.mean_nodes, 1), format_fixed(b.mean_nodes, 1));
  row("held setpoints", cnt(a.held), cnt(b.held));
}

}  // namespace mgrid::io
