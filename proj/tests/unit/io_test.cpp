/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fixtures.hpp"
#include "mgrid/io/config.hpp"
#include "mgrid/io/csv.hpp"
#include "mgrid/io/format.hpp"
#include "mgrid/io/plots.hpp"
#include "mgrid/io/polytope_document.hpp"
#include "mgrid/io/report.hpp"
#include "mgrid/io/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace mgrid;

namespace {

std::vector<double> read_series(const std::string& text, std::size_t steps, double divide_by = 1.0) {
  std::istringstream in(text);
  return io::load_timeseries_csv(in, {1.0, steps, divide_by});
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

// One hour of hand-made plant records with limit events at three steps.
SimulationLog handmade_log() {
  SimulationLog log;
  log.mode = ControllerMode::WithoutPolytope;
  log.x0 = 1.0;
  log.dt_plant_h = 1.0 / 60.0;
  double x = 1.0;
  for (std::size_t i = 0; i < 60; ++i) {
    PlantRecord r;
    r.step = i;
    r.w_l = 1.0;
    r.dispatch.p_b = r.dispatch.commanded_p_b = 1.0;
    r.x = x;
    x -= 1.0 / 60.0;
    r.x_next = x;
    if (i == 5 || i == 20 || i == 40) {
      r.limit_violation = 0.05 * static_cast<double>(i / 5);
      log.events.push_back({i, r.x, 1.0, r.limit_violation, ViolationKind::DischargeLimit});
    }
    log.plant.push_back(r);
  }
  MpcRecord m;
  m.status = MiqpStatus::Optimal;
  m.nodes = 3;
  log.mpc.assign(2, m);
  return log;
}

io::RunConfig parse(const std::string& json) {
  std::istringstream in(json);
  return io::parse_run_config(in);
}

}  // namespace

TEST_SUITE("number formatting") {
  TEST_CASE("shortest round decimal") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(-2.5) == "-2.5");
    CHECK(io::format_number(0.0) == "0");
    CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  }

  TEST_CASE("fixed decimals") { CHECK(io::format_fixed(3.14159, 2) == "3.14"); }

  TEST_CASE("parsing is strict") {
    CHECK(io::parse_number("1.25") == 1.25);
    CHECK(io::parse_number("-3e-2") == -0.03);
    CHECK_THROWS_AS(io::parse_number("abc"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_number("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_number(""), std::invalid_argument);
  }
}

TEST_SUITE("time series files") {
  TEST_CASE("zero-order hold onto the plant grid") {
    const auto v = read_series("t_min,value\n0,10\n60,20\n", 120);
    REQUIRE(v.size() == 120);
    for (std::size_t i = 0; i < 60; ++i) CHECK(v[i] == 10.0);
    for (std::size_t i = 60; i < 120; ++i) CHECK(v[i] == 20.0);
  }

  TEST_CASE("kW are divided by the base power") {
    const auto v = read_series("t_min,value\n0,15\n", 3, 10.0);
    for (double e : v) CHECK(e == 1.5);
  }

  TEST_CASE("an empty file is an error") {
    CHECK_THROWS_AS(read_series("", 10), std::runtime_error);
    CHECK_THROWS_AS(read_series("t_min,value\n", 10), std::runtime_error);
  }

  TEST_CASE("malformed rows report their line") {
    try {
      read_series("t_min,value\n0,1\n1,abc\n", 10);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("time must increase") {
    CHECK_THROWS_AS(read_series("t_min,value\n5,1\n5,2\n", 10), std::runtime_error);
    CHECK_THROWS_AS(read_series("t_min,value\n5,1\n3,2\n", 10), std::runtime_error);
    CHECK_THROWS_AS(read_series("t_min,value\n0.5,1\n", 10), std::runtime_error);
  }

  TEST_CASE("limit samples") {
    std::istringstream in("x,p,side\n0.5,1.2,U\n0.7,-0.4,L\n");
    const auto s = io::read_limit_samples(in);
    REQUIRE(s.size() == 2);
    CHECK(s[0].side == LimitSide::DischargeUpper);
    CHECK(s[1].p == -0.4);
    std::istringstream bad("x,p,side\n0.5,1.2,Q\n");
    CHECK_THROWS_AS(io::read_limit_samples(bad), std::runtime_error);
  }
}

TEST_SUITE("synthetic scenario") {
  const MicrogridParams params = default_params();

  TEST_CASE("same seed, same series") {
    const auto a = io::generate_synthetic_scenario({11, 48.0, 0.05}, params);
    const auto b = io::generate_synthetic_scenario({11, 48.0, 0.05}, params);
    CHECK(a.load == b.load);
    CHECK(a.irradiance == b.irradiance);
    const auto c = io::generate_synthetic_scenario({12, 48.0, 0.05}, params);
    CHECK(a.load != c.load);
  }

  TEST_CASE("rating ordering of PV, load and battery") {
    const auto s = io::generate_synthetic_scenario({7, 48.0, 0.05}, params);
    REQUIRE(s.load.size() == 2880);
    double max_pv = 0.0;
    for (double irr : s.irradiance) max_pv = std::max(max_pv, pv_available_from_irradiance(irr, params.pv.p_max));
    const double max_load = *std::max_element(s.load.begin(), s.load.end());
    CHECK(max_pv == params.pv.p_max);
    CHECK(max_load > 1.5);
    CHECK(max_load < params.pv.p_max);
    CHECK(*std::min_element(s.load.begin(), s.load.end()) >= 0.0);
  }

  TEST_CASE("no sun at midnight") {
    const auto s = io::generate_synthetic_scenario({7, 48.0, 0.05}, params);
    CHECK(pv_available_from_irradiance(s.irradiance[0], params.pv.p_max) == 0.0);
    CHECK(pv_available_from_irradiance(s.irradiance[1440], params.pv.p_max) == 0.0);
  }

  TEST_CASE("the generated scenario is runnable") {
    auto s = io::generate_synthetic_scenario({7, 2.0, 0.05}, params);
    CHECK_NOTHROW(validate_scenario(s));
  }
}

TEST_SUITE("polytope documents") {
  TEST_CASE("round trip keeps every containment decision") {
    const auto poly = reference_pu_polytope();
    std::stringstream doc;
    io::write_polytope(poly, doc);
    const auto back = io::read_polytope(doc);
    const auto& b = poly.box();
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const double x = b.x_min - 0.05 + (b.x_max - b.x_min + 0.1) * i / 99.0;
        const double p = b.p_min - 0.05 + (b.p_max - b.p_min + 0.1) * j / 99.0;
        CHECK(poly.contains(x, p) == back.contains(x, p));
      }
    }
  }

  TEST_CASE("comments are ignored and garbage is rejected") {
    std::istringstream ok("# fitted\nx_min = 0\nx_max = 2\np_min = -1\np_max = 1\nplanes = 1\nplane.0 = 0 1 0.5\n");
    CHECK(io::read_polytope(ok).power_bounds_at(1.0).hi == 0.5);
    std::istringstream missing("x_min = 0\nx_max = 2\n");
    CHECK_THROWS(io::read_polytope(missing));
    std::istringstream short_plane("x_min = 0\nx_max = 2\np_min = -1\np_max = 1\nplanes = 1\nplane.0 = 0 1\n");
    CHECK_THROWS(io::read_polytope(short_plane));
  }
}

TEST_SUITE("trajectory and report files") {
  TEST_CASE("trajectory rows follow the energy balance") {
    Scenario s;
    s.params = default_params();
    s.duration_h = 2.0;
    s.mode = ControllerMode::WithoutPolytope;
    s.load.assign(s.plant_steps(), 2.2);
    s.irradiance.assign(s.plant_steps(), 300.0);
    const auto log = run_closed_loop(s);
    std::stringstream out;
    io::write_trajectory_csv(log, out);
    const auto rows = split_csv(out.str());
    REQUIRE(rows.size() == log.plant.size() + 1);
    const auto header = split_csv(io::kTrajectoryHeader)[0];
    CHECK(rows[0] == header);
    const auto col = [&](const char* name) {
      return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const std::size_t cx = col("x");
    const std::size_t cp = col("p_b");
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
      const double x = io::parse_number(rows[i][cx]);
      const double p = io::parse_number(rows[i][cp]);
      const double next = io::parse_number(rows[i + 1][cx]);
      const bool clamped = std::any_of(log.corrections.begin(), log.corrections.end(),
                                       [&](const ClampCorrection& c) { return c.step == i - 1; });
      if (!clamped) CHECK(std::abs(x - s.params.dt_plant_h * p - next) <= 1e-9);
    }
  }

  TEST_CASE("report agrees with the summary and reads back") {
    const auto log = handmade_log();
    const auto report = summarize_violations(log);
    std::stringstream a;
    io::write_report_json(log, report, a);
    std::stringstream b;
    io::write_report_json(log, report, b);
    CHECK(a.str() == b.str());
    const auto back = io::read_report_json(a);
    CHECK(back.mode == "without-polytope");
    CHECK(back.violations.violation_steps == 3);
    CHECK(back.violations.total_steps == 60);
    CHECK(back.violations.max_magnitude == report.max_magnitude);
    CHECK(back.violations.histogram == report.histogram);
  }

  TEST_CASE("statistics over controller solves") {
    const auto stats = io::solve_statistics(handmade_log());
    CHECK(stats.solves == 2);
    CHECK(stats.mean_nodes == 3.0);
    CHECK(stats.max_nodes == 3);
    CHECK(stats.held == 0);
  }

  TEST_CASE("comparison table lists both modes") {
    io::ReportSummary a;
    a.mode = "with-polytope";
    io::ReportSummary b;
    b.mode = "without-polytope";
    b.violations.violation_steps = 9;
    std::ostringstream out;
    io::write_comparison(a, b, out);
    CHECK(out.str().find("with-polytope") != std::string::npos);
    CHECK(out.str().find("without-polytope") != std::string::npos);
  }

  TEST_CASE("malformed reports are rejected") {
    std::istringstream in("{\"mode\": \"x\"}");
    CHECK_THROWS(io::read_report_json(in));
  }
}

TEST_SUITE("plots") {
  TEST_CASE("an empty histogram says so") {
    std::ostringstream out;
    io::render_violation_histogram_svg(summarize_violations({}, 10, 1.0 / 60.0), out);
    CHECK(out.str().find("0 events") != std::string::npos);
  }

  TEST_CASE("three events give three markers and a total of three") {
    const auto log = handmade_log();
    std::ostringstream traj;
    io::render_trajectory_svg(log, reference_pu_polytope(), traj);
    CHECK(count(traj.str(), "class=\"violation\"") == 3);
    std::ostringstream hist;
    io::render_violation_histogram_svg(summarize_violations(log), hist);
    CHECK(hist.str().find(">3 events<") != std::string::npos);
  }

  TEST_CASE("output is byte identical") {
    const auto log = handmade_log();
    std::ostringstream a, b;
    io::render_trajectory_svg(log, reference_pu_polytope(), a);
    io::render_trajectory_svg(log, reference_pu_polytope(), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("<svg", 0) == 0);
  }
}

TEST_SUITE("run configuration") {
  TEST_CASE("an empty document keeps the defaults") {
    const auto c = parse("{}");
    CHECK(c.seed == 7);
    CHECK(c.modes.size() == 2);
    CHECK(c.params.cost.gamma == 0.9);
    CHECK(io::validate_config(c).ok());
  }

  TEST_CASE("fields are read") {
    const auto c = parse(R"({"seed": 3, "modes": ["with"], "initial": {"x0": 1.2},
                             "params": {"dt_plant_min": 2, "droop": {"k_b": 2.0}},
                             "scenario": {"synthetic": {"duration_h": 4}}})");
    CHECK(c.seed == 3);
    REQUIRE(c.modes.size() == 1);
    CHECK(c.modes[0] == ControllerMode::WithPolytope);
    CHECK(c.x0 == 1.2);
    CHECK(std::abs(c.params.dt_plant_h - 2.0 / 60.0) <= 1e-15);
    CHECK(c.params.droop.k_b == 2.0);
    CHECK(c.synthetic->duration_h == 4.0);
  }

  TEST_CASE("mistakes are reported") {
    CHECK_THROWS_AS(parse("{\"sed\": 3}"), io::ConfigError);
    CHECK_THROWS_AS(parse("{\"seed\": \"three\"}"), io::ConfigError);
    CHECK_THROWS_AS(parse("{\"modes\": [\"sideways\"]}"), io::ConfigError);
    CHECK_THROWS_AS(parse("{\"polytope\": {\"source\": \"document\"}}"), io::ConfigError);
    CHECK_THROWS_AS(parse("{\"polytope\": {\"source\": \"lines\", \"box\": [1, 2]}}"), io::ConfigError);
    CHECK_THROWS_AS(parse("not json"), io::ConfigError);
  }

  TEST_CASE("inconsistent parameters fail validation") {
    auto c = parse(R"({"params": {"dt_plant_h": 0.07}})");
    CHECK_FALSE(io::validate_config(c).ok());
  }

  TEST_CASE("line polytopes are resolved and rescaled") {
    auto c = parse(R"({"polytope": {"source": "lines", "box": [0, 10, -1, 1], "slopes": [0], "intercepts": [0.5],
                                    "rescale_to": [0, 1, -2, 2]}})");
    io::resolve_polytope(c);
    const auto& poly = c.params.battery.polytope;
    CHECK(poly.box().x_max == 1.0);
    CHECK(std::abs(poly.power_bounds_at(0.5).hi - 1.0) <= 1e-12);
  }
}
