/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fixtures.hpp"
#include "mgrid/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mgrid;

namespace {

Scenario flat_scenario(double hours, double load, double irradiance) {
  Scenario s;
  s.params = default_params();
  s.duration_h = hours;
  s.load.assign(s.plant_steps(), load);
  s.irradiance.assign(s.plant_steps(), irradiance);
  return s;
}

// A few hours of a daytime profile with a load above the battery rating.
Scenario daytime_scenario(double hours, std::uint64_t seed) {
  Scenario s = flat_scenario(hours, 0.0, 0.0);
  fixture::Random rng(seed);
  const double level = rng.uniform(1.6, 2.6);
  for (std::size_t i = 0; i < s.plant_steps(); ++i) {
    const double t = static_cast<double>(i) / 60.0;
    s.load[i] = level + 0.6 * std::sin(2.0 * std::numbers::pi * t / hours) + rng.uniform(-0.05, 0.05);
    s.irradiance[i] = std::max(0.0, 1100.0 * std::sin(std::numbers::pi * (t + 1.0) / (hours + 2.0)));
  }
  s.x0 = rng.uniform(0.4, 1.8);
  return s;
}

StoragePolytope flat_cap(double p_hi) {
  return StoragePolytope({0.0, 2.0, -0.59, 1.5}, {HalfPlane{0.0, 1.0, p_hi}});
}

ViolationEvent limit_event(std::size_t step, double magnitude) {
  return {step, 1.0, 0.0, magnitude, ViolationKind::DischargeLimit};
}

}  // namespace

TEST_SUITE("forecast windows") {
  TEST_CASE("constant series") {
    const auto s = flat_scenario(4.0, 1.7, 500.0);
    const auto w = window_average_forecast(s, 0, 6);
    REQUIRE(w.w_l.size() == 6);
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(w.w_l[j] - 1.7) <= 1e-12);
      CHECK(std::abs(w.w_pv[j] - 2.25) <= 1e-12);
    }
  }

  TEST_CASE("alternating samples average to the mean") {
    auto s = flat_scenario(1.0, 0.0, 0.0);
    for (std::size_t i = 0; i < s.load.size(); ++i) s.load[i] = i % 2 == 0 ? 0.0 : 2.0;
    CHECK(std::abs(window_average_forecast(s, 0, 1).w_l[0] - 1.0) <= 1e-15);
  }

  TEST_CASE("irradiance is converted before averaging") {
    auto s = flat_scenario(0.5, 0.0, 0.0);
    for (std::size_t i = 0; i < s.irradiance.size(); ++i) s.irradiance[i] = i % 2 == 0 ? 2000.0 : 0.0;
    // Saturation at 1000 W/m^2 makes the mean 2.25, not min(1000, 1000) -> 4.5.
    CHECK(std::abs(window_average_forecast(s, 0, 1).w_pv[0] - 2.25) <= 1e-12);
  }

  TEST_CASE("windows past the end repeat the final sample") {
    auto s = flat_scenario(1.0, 1.0, 0.0);
    s.load.back() = 3.0;
    const auto w = window_average_forecast(s, 1, 6);
    for (int j = 1; j < 6; ++j) CHECK(w.w_l[j] == 3.0);
  }
}

TEST_SUITE("droop dispatch") {
  const DroopGains unit{1.0, 1.0};

  TEST_CASE("fuel cell on shares the mismatch") {
    const auto d = droop_dispatch({1.0, 0.5, 0.8, 1}, 4.5, 2.5, unit);
    CHECK(std::abs(d.mu - 0.1) <= 1e-12);
    CHECK(std::abs(d.p_b - 0.6) <= 1e-12);
    CHECK(std::abs(d.p_fc - 1.1) <= 1e-12);
    CHECK(std::abs(d.p_fc + d.p_b + d.p_pv - 2.5) <= 1e-12);
    CHECK(d.commanded_p_b == d.p_b);
  }

  TEST_CASE("fuel cell off leaves the battery alone") {
    const auto d = droop_dispatch({0.0, 0.5, 0.8, 0}, 4.5, 2.0, unit);
    CHECK(d.p_fc == 0.0);
    CHECK(std::abs(d.p_b - 1.2) <= 1e-12);
    CHECK(std::abs(d.mu - 0.7) <= 1e-12);
  }

  TEST_CASE("perfect setpoint match") {
    const auto d = droop_dispatch({1.0, 0.5, 0.8, 1}, 4.5, 2.3, unit);
    CHECK(std::abs(d.mu) <= 1e-12);
    CHECK(std::abs(d.p_b - 0.5) <= 1e-12);
    CHECK(std::abs(d.p_fc - 1.0) <= 1e-12);
  }

  TEST_CASE("PV output is the smaller of setpoint and availability") {
    CHECK(droop_dispatch({0.0, 0.0, 3.0, 0}, 1.0, 1.0, unit).p_pv == 1.0);
    CHECK(droop_dispatch({0.0, 0.0, 0.7, 0}, 1.0, 1.0, unit).p_pv == 0.7);
  }

  TEST_CASE("balance and sharing hold for arbitrary gains") {
    fixture::Random rng(31);
    for (int t = 0; t < 5000; ++t) {
      const DroopGains g{rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)};
      const ControlSetpoints sp{rng.uniform(0.2, 4.5), rng.uniform(-0.59, 1.5), rng.uniform(0.0, 4.5), rng.bit()};
      const double w_pv = rng.uniform(0.0, 4.5);
      const double w_l = rng.uniform(0.0, 4.5);
      const auto d = droop_dispatch(sp, w_pv, w_l, g);
      CHECK(std::abs(d.p_fc + d.p_b + d.p_pv - w_l) <= 1e-9);
      CHECK(std::abs(d.mu - g.k_b * (d.p_b - sp.u_b)) <= 1e-9);
      if (sp.delta_fc == 1) {
        CHECK(std::abs(g.k_b * (d.p_b - sp.u_b) - g.k_fc * (d.p_fc - sp.u_fc)) <= 1e-9);
      } else {
        CHECK(d.p_fc == 0.0);
      }
    }
  }
}

TEST_SUITE("low-level limits") {
  const FcParams fc{};

  TEST_CASE("inside the bounds nothing changes") {
    DispatchResult d;
    d.p_b = d.commanded_p_b = 0.2;
    d.p_fc = 1.0;
    const auto r = apply_low_level_limits(d, flat_cap(0.265), 1.0, fc, 1);
    CHECK(r.events.empty());
    CHECK_FALSE(r.clipped);
    CHECK(r.dispatch.p_b == 0.2);
    CHECK(r.dispatch.p_fc == 1.0);
  }

  TEST_CASE("fuel cell on absorbs the clipped residual") {
    DispatchResult d;
    d.p_b = d.commanded_p_b = 0.8;
    d.p_fc = 1.0;
    const auto r = apply_low_level_limits(d, flat_cap(0.265), 1.0, fc, 1, 42);
    CHECK(r.clipped);
    CHECK(std::abs(r.dispatch.p_b - 0.265) <= 1e-12);
    CHECK(std::abs(r.dispatch.p_fc - 1.535) <= 1e-12);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == ViolationKind::DischargeLimit);
    CHECK(r.events[0].step == 42);
    CHECK(std::abs(r.events[0].magnitude - 0.535) <= 1e-12);
    CHECK(r.dispatch.imbalance == 0.0);
  }

  TEST_CASE("fuel cell off leaves the battery unclipped") {
    const auto poly = reference_pu_polytope();
    const double x = 1.0;
    DispatchResult d;
    d.p_b = d.commanded_p_b = poly.power_bounds_at(x).hi + 0.58;
    const auto r = apply_low_level_limits(d, poly, x, fc, 0);
    CHECK_FALSE(r.clipped);
    CHECK(r.dispatch.p_b == d.p_b);
    REQUIRE(r.events.size() == 1);
    CHECK(std::abs(r.events[0].magnitude - 0.58) <= 1e-12);
  }

  TEST_CASE("charge side clipping") {
    const auto poly = reference_pu_polytope();
    const double x = 1.0;
    const double lo = poly.power_bounds_at(x).lo;
    DispatchResult d;
    d.p_b = d.commanded_p_b = lo - 0.1;
    d.p_fc = 2.0;
    const auto r = apply_low_level_limits(d, poly, x, fc, 1);
    CHECK(r.dispatch.p_b == lo);
    CHECK(std::abs(r.dispatch.p_fc - 1.9) <= 1e-12);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == ViolationKind::ChargeLimit);
  }

  TEST_CASE("a saturated fuel cell leaves an imbalance") {
    DispatchResult d;
    d.p_b = d.commanded_p_b = 0.8;
    d.p_fc = 4.4;
    const auto r = apply_low_level_limits(d, flat_cap(0.265), 1.0, fc, 1);
    CHECK(r.dispatch.p_fc == 4.5);
    CHECK(std::abs(r.dispatch.imbalance - 0.435) <= 1e-12);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[1].kind == ViolationKind::FcSaturationImbalance);
  }

  TEST_CASE("power is conserved whenever no imbalance is left") {
    fixture::Random rng(32);
    const auto poly = reference_pu_polytope();
    for (int t = 0; t < 5000; ++t) {
      const double x = rng.uniform(0.258, 1.972);
      const auto sp = ControlSetpoints{rng.uniform(0.2, 4.5), rng.uniform(-0.59, 1.5), rng.uniform(0.0, 4.5), rng.bit()};
      const double w_l = rng.uniform(0.0, 4.5);
      const auto raw = droop_dispatch(sp, rng.uniform(0.0, 4.5), w_l, {1.0, 1.0});
      const auto r = apply_low_level_limits(raw, poly, x, fc, sp.delta_fc);
      const auto& d = r.dispatch;
      CHECK(std::abs(d.p_fc + d.p_b + d.p_pv + d.imbalance - w_l) <= 1e-9);
      if (sp.delta_fc == 1) CHECK(poly.violation_magnitude(x, d.p_b) <= 1e-12);
    }
  }
}

TEST_SUITE("plant step") {
  const auto poly = reference_pu_polytope();

  TEST_CASE("idle battery") {
    DispatchResult d;
    const auto r = plant_step(1.2, d, 1.0 / 60.0, poly);
    CHECK(r.x == 1.2);
    CHECK_FALSE(r.event.has_value());
  }

  TEST_CASE("one minute at 1.5 pu") {
    DispatchResult d;
    d.p_b = 1.5;
    CHECK(std::abs(plant_step(1.0, d, 1.0 / 60.0, poly).x - 0.975) <= 1e-12);
  }

  TEST_CASE("empty battery is clamped and logged") {
    DispatchResult d;
    d.p_b = 1.5;
    const double x_min = poly.box().x_min;
    const auto r = plant_step(x_min + 0.001, d, 1.0 / 60.0, poly, 7);
    CHECK(r.x == x_min);
    REQUIRE(r.event.has_value());
    CHECK(r.event->kind == ViolationKind::EnergyBound);
    CHECK(r.event->step == 7);
    CHECK(std::abs(r.event->magnitude - (0.025 - 0.001)) <= 1e-12);
    CHECK(std::abs(r.correction - (0.025 - 0.001)) <= 1e-12);
  }
}

TEST_SUITE("violation summary") {
  TEST_CASE("no events") {
    const auto r = summarize_violations({}, 100, 1.0 / 60.0);
    CHECK(r.violation_steps == 0);
    CHECK(r.total_steps == 100);
    CHECK(r.percentage == 0.0);
    CHECK(r.max_magnitude == 0.0);
    CHECK(r.histogram.empty());
    CHECK(r.fraction_below_0_1 == 0.0);
  }

  TEST_CASE("three hand-countable events") {
    const std::vector<ViolationEvent> ev{limit_event(3, 0.05), limit_event(10, 0.07), limit_event(50, 0.58)};
    const auto r = summarize_violations(ev, 100, 1.0 / 60.0);
    CHECK(r.violation_steps == 3);
    CHECK(std::abs(r.percentage - 3.0) <= 1e-12);
    CHECK(r.max_magnitude == 0.58);
    CHECK(std::abs(r.fraction_below_0_1 - 2.0 / 3.0) <= 1e-12);
    CHECK(std::abs(r.violation_minutes - 3.0) <= 1e-12);
    std::size_t total = 0;
    for (auto c : r.histogram) total += c;
    CHECK(total == 3);
    CHECK(r.histogram[1] == 2);  // 0.05 and 0.07 share the [0.05, 0.1) bin
    CHECK(r.histogram[11] == 1);
  }

  TEST_CASE("several events at one step count once") {
    const std::vector<ViolationEvent> ev{limit_event(4, 0.2), limit_event(4, 0.3)};
    const auto r = summarize_violations(ev, 10, 1.0 / 60.0);
    CHECK(r.violation_steps == 1);
    CHECK(r.max_magnitude == 0.3);
  }

  TEST_CASE("energy and imbalance events are counted separately") {
    std::vector<ViolationEvent> ev{limit_event(1, 0.2)};
    ev.push_back({2, 0.0, 0.0, 0.01, ViolationKind::EnergyBound});
    ev.push_back({3, 0.0, 0.0, 0.01, ViolationKind::FcSaturationImbalance});
    const auto r = summarize_violations(ev, 10, 1.0 / 60.0);
    CHECK(r.violation_steps == 1);
    CHECK(r.energy_bound_events == 1);
    CHECK(r.imbalance_events == 1);
  }

  TEST_CASE("339 minutes of a two-day run") {
    std::vector<ViolationEvent> ev;
    for (std::size_t i = 0; i < 339; ++i) ev.push_back(limit_event(i * 8, 0.05));
    const auto r = summarize_violations(ev, 2880, 1.0 / 60.0);
    CHECK(r.violation_steps == 339);
    CHECK(std::abs(r.violation_minutes - 339.0) <= 1e-9);
    CHECK(std::abs(r.percentage - 11.77) < 0.005);
  }
}

TEST_SUITE("closed loop") {
  TEST_CASE("scenario checks") {
    auto s = flat_scenario(1.0, 0.0, 0.0);
    s.load.pop_back();
    CHECK_THROWS_AS(validate_scenario(s), std::invalid_argument);
    auto t = flat_scenario(1.0, 0.0, 0.0);
    t.delta_fc0 = 2;
    CHECK_THROWS_AS(validate_scenario(t), std::invalid_argument);
    auto u = flat_scenario(1.0, 0.0, 0.0);
    u.duration_h = 0.75;
    CHECK_THROWS_AS(validate_scenario(u), std::invalid_argument);
  }

  TEST_CASE("two idle days stay at rest") {
    auto s = flat_scenario(48.0, 0.0, 0.0);
    s.x0 = 1.115;
    const auto log = run_closed_loop(s);
    CHECK(log.plant.size() == 2880);
    CHECK(log.mpc.size() == 96);
    CHECK(log.events.empty());
    for (const auto& p : log.plant) {
      CHECK(p.setpoints.delta_fc == 0);
      CHECK(std::abs(p.x_next - 1.115) <= 1e-9);
    }
  }

  TEST_CASE("with the polytope a prescient controller causes no violations") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto log = run_closed_loop(daytime_scenario(3.0, seed));
      CHECK(summarize_violations(log).violation_steps == 0);
      for (const auto& m : log.mpc) CHECK_FALSE(m.held);
    }
  }

  TEST_CASE("a raw plant input with window-constant data is also exact") {
    auto s = daytime_scenario(2.0, 4);
    for (std::size_t k = 0; k < s.mpc_steps(); ++k) {
      for (std::size_t i = 1; i < 30; ++i) {
        s.load[k * 30 + i] = s.load[k * 30];
        s.irradiance[k * 30 + i] = s.irradiance[k * 30];
      }
    }
    s.plant_input = PlantInput::Raw;
    CHECK(summarize_violations(run_closed_loop(s)).violation_steps == 0);
  }

  TEST_CASE("trajectory invariants hold in both modes") {
    for (auto mode : {ControllerMode::WithPolytope, ControllerMode::WithoutPolytope}) {
      for (std::uint64_t seed : {5u, 6u}) {
        auto s = daytime_scenario(3.0, seed);
        s.mode = mode;
        const auto log = run_closed_loop(s);
        const auto& g = s.params.droop;
        double x = s.x0;
        double corrections = 0.0;
        for (const auto& c : log.corrections) corrections += c.amount;
        for (const auto& p : log.plant) {
          const auto& d = p.dispatch;
          if (d.imbalance == 0.0) CHECK(std::abs(d.p_fc + d.p_b + d.p_pv - p.w_l) <= 1e-9);
          if (p.setpoints.delta_fc == 1 && !p.clipped) {
            CHECK(std::abs(g.k_b * (d.p_b - p.setpoints.u_b) - g.k_fc * (d.p_fc - p.setpoints.u_fc)) <= 1e-9);
          }
          if (p.setpoints.delta_fc == 0) CHECK(d.p_fc == 0.0);
          x -= s.params.dt_plant_h * d.p_b;
        }
        CHECK(std::abs(log.plant.back().x_next - (x + corrections)) <= 1e-9);
      }
    }
  }

  TEST_CASE("runs are reproducible") {
    auto s = daytime_scenario(2.0, 8);
    s.mode = ControllerMode::WithoutPolytope;
    const auto a = run_closed_loop(s);
    const auto b = run_closed_loop(s);
    REQUIRE(a.plant.size() == b.plant.size());
    for (std::size_t i = 0; i < a.plant.size(); ++i) {
      CHECK(a.plant[i].x_next == b.plant[i].x_next);
      CHECK(a.plant[i].dispatch.p_b == b.plant[i].dispatch.p_b);
    }
    CHECK(a.realized_cost == b.realized_cost);
  }
}
