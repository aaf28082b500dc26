/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/csv.hpp"

#include "mgrid/io/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mgrid::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw std::runtime_error(what + " (line " + std::to_string(line) + ")");
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<double> load_timeseries_csv(std::istream& in, const TimeseriesOptions& options) {
  if (!(options.dt_plant_min > 0.0)) throw std::invalid_argument("plant sample time must be positive");
  if (!(options.divide_by > 0.0)) throw std::invalid_argument("unit divisor must be positive");

  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<std::pair<long long, double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t_min,value") fail("expected header 't_min,value'", lineno);
      header_seen = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != 2) fail("expected 2 fields", lineno);
    double t = 0.0;
    double v = 0.0;
    try {
      t = parse_number(fields[0]);
      v = parse_number(fields[1]);
    } catch (const std::invalid_argument& e) {
      fail(e.what(), lineno);
    }
    if (t != std::floor(t)) fail("time must be an integer number of minutes", lineno);
    if (!std::isfinite(v)) fail("value must be finite", lineno);
    const auto minute = static_cast<long long>(t);
    if (!rows.empty() && minute <= rows.back().first) fail("time must be strictly increasing", lineno);
    rows.emplace_back(minute, v / options.divide_by);
  }
  if (rows.empty()) throw std::runtime_error("time series is empty");

  std::vector<double> out(options.steps);
  std::size_t r = 0;
  for (std::size_t i = 0; i < options.steps; ++i) {
    const double t = static_cast<double>(i) * options.dt_plant_min;
    while (r + 1 < rows.size() && static_cast<double>(rows[r + 1].first) <= t + 1e-9) ++r;
    out[i] = rows[r].second;
  }
  return out;
}

std::vector<double> load_timeseries_csv(const std::filesystem::path& path, const TimeseriesOptions& options) {
  auto in = open(path);
  try {
    return load_timeseries_csv(in, options);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<LimitSample> read_limit_samples(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<LimitSample> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "x,p,side") fail("expected header 'x,p,side'", lineno);
      header_seen = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != 3) fail("expected 3 fields", lineno);
    LimitSample s;
    try {
      s.x = parse_number(fields[0]);
      s.p = parse_number(fields[1]);
    } catch (const std::invalid_argument& e) {
      fail(e.what(), lineno);
    }
    const std::string side = strip(fields[2]);
    if (side == "U") {
      s.side = LimitSide::DischargeUpper;
    } else if (side == "L") {
      s.side = LimitSide::ChargeLower;
    } else {
      fail("side must be U or L", lineno);
    }
    out.push_back(s);
  }
  if (out.empty()) throw std::runtime_error("no limit samples");
  return out;
}

std::vector<LimitSample> read_limit_samples(const std::filesystem::path& path) {
  auto in = open(path);
  try {
    return read_limit_samples(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_trajectory_csv(const SimulationLog& log, std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  const double dt_min = log.dt_plant_h * 60.0;
  for (const auto& r : log.plant) {
    const auto& sp = r.setpoints;
    const auto& d = r.dispatch;
    out << format_number(static_cast<double>(r.step) * dt_min) << ',' << format_number(r.w_l) << ','
        << format_number(r.w_pv) << ',' << format_number(sp.u_fc) << ',' << format_number(sp.u_b) << ','
        << format_number(sp.u_pv) << ',' << sp.delta_fc << ',' << format_number(d.p_fc) << ','
        << format_number(d.p_b) << ',' << format_number(d.p_pv) << ',' << format_number(r.x) << ','
        << format_number(d.mu) << ',' << format_number(r.limit_violation) << '\n';
  }
}

}  // namespace mgrid::io
