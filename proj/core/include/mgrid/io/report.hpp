/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mgrid::io {

struct SolveStatistics {
  std::size_t solves = 0;
  std::size_t held = 0;
  double mean_nodes = 0.0;
  std::size_t max_nodes = 0;
  double mean_wall_seconds = 0.0;
  double max_wall_seconds = 0.0;
};

SolveStatistics solve_statistics(const SimulationLog& log);

/// Fields of a report file that the compare command reads back.
struct ReportSummary {
  std::string mode;
  ViolationReport violations;
  double total_discounted_cost = 0.0;
  double realized_cost = 0.0;
  double mean_nodes = 0.0;
  std::size_t held = 0;
};

/// Deterministic JSON report. Wall-clock figures go to write_timing_json.
void write_report_json(const SimulationLog& log, const ViolationReport& report, std::ostream& out);
void write_timing_json(const SimulationLog& log, std::ostream& out);

ReportSummary read_report_json(std::istream& in);
ReportSummary read_report_json(const std::filesystem::path& path);

/// Side-by-side text table of two reports.
void write_comparison(const ReportSummary& a, const ReportSummary& b, std::ostream& out);

}  // namespace mgrid::io
