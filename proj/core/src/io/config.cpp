/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/config.hpp"

#include "mgrid/io/csv.hpp"
#include "mgrid/io/polytope_document.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>

namespace mgrid::io {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

EnergyPowerBox read_box(const json& v, const std::string& where) {
  std::vector<double> b;
  try {
    b = v.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": expected [x_min, x_max, p_min, p_max]");
  }
  if (b.size() != 4) throw ConfigError(where + ": expected [x_min, x_max, p_min, p_max]");
  return {b[0], b[1], b[2], b[3]};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

ControllerMode parse_mode(const std::string& m) {
  if (m == "with") return ControllerMode::WithPolytope;
  if (m == "without") return ControllerMode::WithoutPolytope;
  throw ConfigError("modes: expected 'with' or 'without', got '" + m + "'");
}

void read_params(const json& j, MicrogridParams& p) {
  only_keys(j, "params", {"pv", "fc", "droop", "cost", "dt_mpc_min", "dt_plant_min", "dt_mpc_h", "dt_plant_h",
                          "horizon_steps", "base_power_kw"});
  if (j.contains("pv")) {
    only_keys(j["pv"], "params.pv", {"p_min", "p_max"});
    read(j["pv"], "p_min", p.pv.p_min, "params.pv");
    read(j["pv"], "p_max", p.pv.p_max, "params.pv");
  }
  if (j.contains("fc")) {
    only_keys(j["fc"], "params.fc", {"p_min", "p_max"});
    read(j["fc"], "p_min", p.fc.p_min, "params.fc");
    read(j["fc"], "p_max", p.fc.p_max, "params.fc");
  }
  if (j.contains("droop")) {
    only_keys(j["droop"], "params.droop", {"k_b", "k_fc"});
    read(j["droop"], "k_b", p.droop.k_b, "params.droop");
    read(j["droop"], "k_fc", p.droop.k_fc, "params.droop");
  }
  if (j.contains("cost")) {
    const auto& c = j["cost"];
    only_keys(c, "params.cost", {"c_pv_quad", "c_fc_run_fixed", "c_fc_run_linear", "c_fc_switch", "c_b_quad", "gamma"});
    read(c, "c_pv_quad", p.cost.c_pv_quad, "params.cost");
    read(c, "c_fc_run_fixed", p.cost.c_fc_run_fixed, "params.cost");
    read(c, "c_fc_run_linear", p.cost.c_fc_run_linear, "params.cost");
    read(c, "c_fc_switch", p.cost.c_fc_switch, "params.cost");
    read(c, "c_b_quad", p.cost.c_b_quad, "params.cost");
    read(c, "gamma", p.cost.gamma, "params.cost");
  }
  if (j.contains("dt_mpc_min") && j.contains("dt_mpc_h")) throw ConfigError("params: give dt_mpc_min or dt_mpc_h");
  if (j.contains("dt_plant_min") && j.contains("dt_plant_h")) {
    throw ConfigError("params: give dt_plant_min or dt_plant_h");
  }
  double minutes = 0.0;
  if (j.contains("dt_mpc_min")) {
    read(j, "dt_mpc_min", minutes, "params");
    p.dt_mpc_h = minutes / 60.0;
  }
  if (j.contains("dt_plant_min")) {
    read(j, "dt_plant_min", minutes, "params");
    p.dt_plant_h = minutes / 60.0;
  }
  read(j, "dt_mpc_h", p.dt_mpc_h, "params");
  read(j, "dt_plant_h", p.dt_plant_h, "params");
  read(j, "horizon_steps", p.horizon_steps, "params");
  read(j, "base_power_kw", p.base_power_kw, "params");
}

void read_polytope_source(const json& j, PolytopeSource& src, const std::filesystem::path& base) {
  only_keys(j, "polytope",
            {"source", "path", "upper_segments", "lower_segments", "box", "slopes", "intercepts", "rescale_to"});
  std::string kind = "reference";
  read(j, "source", kind, "polytope");
  if (kind == "reference") {
    src.kind = PolytopeSourceKind::Reference;
  } else if (kind == "document") {
    src.kind = PolytopeSourceKind::Document;
  } else if (kind == "fit") {
    src.kind = PolytopeSourceKind::Fit;
  } else if (kind == "lines") {
    src.kind = PolytopeSourceKind::Lines;
  } else {
    throw ConfigError("polytope.source: expected reference, document, fit or lines");
  }
  if (j.contains("path")) {
    std::string p;
    read(j, "path", p, "polytope");
    src.path = resolve(base, p);
  }
  read(j, "upper_segments", src.upper_segments, "polytope");
  read(j, "lower_segments", src.lower_segments, "polytope");
  read(j, "slopes", src.slopes, "polytope");
  read(j, "intercepts", src.intercepts, "polytope");
  if (j.contains("box")) src.box = read_box(j["box"], "polytope.box");
  if (j.contains("rescale_to")) src.rescale_to = read_box(j["rescale_to"], "polytope.rescale_to");
  if ((src.kind == PolytopeSourceKind::Document || src.kind == PolytopeSourceKind::Fit) && src.path.empty()) {
    throw ConfigError("polytope: source '" + kind + "' needs a path");
  }
  if (src.kind == PolytopeSourceKind::Lines && (!src.box || src.slopes.size() != src.intercepts.size())) {
    throw ConfigError("polytope: source 'lines' needs a box and equally many slopes and intercepts");
  }
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"seed", "output_dir", "modes", "plant_input", "initial", "scenario", "params", "polytope", "solver"});

  RunConfig c;
  read(j, "seed", c.seed, "config");
  if (j.contains("output_dir")) {
    std::string out;
    read(j, "output_dir", out, "config");
    c.output_dir = resolve(base_dir, out);
  }
  if (j.contains("modes")) {
    std::vector<std::string> modes;
    read(j, "modes", modes, "config");
    if (modes.empty()) throw ConfigError("modes: at least one mode is required");
    c.modes.clear();
    for (const auto& m : modes) c.modes.push_back(parse_mode(m));
  }
  if (j.contains("plant_input")) {
    std::string pi;
    read(j, "plant_input", pi, "config");
    if (pi == "window-mean") {
      c.plant_input = PlantInput::WindowMean;
    } else if (pi == "raw") {
      c.plant_input = PlantInput::Raw;
    } else {
      throw ConfigError("plant_input: expected 'window-mean' or 'raw'");
    }
  }
  if (j.contains("initial")) {
    only_keys(j["initial"], "initial", {"x0", "delta_fc0"});
    read(j["initial"], "x0", c.x0, "initial");
    read(j["initial"], "delta_fc0", c.delta_fc0, "initial");
  }
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    only_keys(s, "scenario", {"synthetic", "data"});
    if (s.contains("synthetic") == s.contains("data")) {
      throw ConfigError("scenario: give exactly one of 'synthetic' and 'data'");
    }
    if (s.contains("synthetic")) {
      only_keys(s["synthetic"], "scenario.synthetic", {"duration_h", "noise"});
      SyntheticSettings syn;
      read(s["synthetic"], "duration_h", syn.duration_h, "scenario.synthetic");
      read(s["synthetic"], "noise", syn.noise, "scenario.synthetic");
      c.synthetic = syn;
    } else {
      const auto& d = s["data"];
      only_keys(d, "scenario.data", {"load_csv", "irradiance_csv", "load_unit", "duration_h"});
      if (!d.contains("load_csv") || !d.contains("irradiance_csv")) {
        throw ConfigError("scenario.data: load_csv and irradiance_csv are required");
      }
      DataSource src;
      std::string path;
      read(d, "load_csv", path, "scenario.data");
      src.load_csv = resolve(base_dir, path);
      read(d, "irradiance_csv", path, "scenario.data");
      src.irradiance_csv = resolve(base_dir, path);
      std::string unit = "kW";
      read(d, "load_unit", unit, "scenario.data");
      if (unit != "kW" && unit != "pu") throw ConfigError("scenario.data.load_unit: expected 'kW' or 'pu'");
      src.load_in_kw = unit == "kW";
      read(d, "duration_h", src.duration_h, "scenario.data");
      c.data = src;
      c.synthetic.reset();
    }
  }
  if (j.contains("params")) read_params(j["params"], c.params);
  if (j.contains("polytope")) read_polytope_source(j["polytope"], c.polytope, base_dir);
  if (j.contains("solver")) {
    only_keys(j["solver"], "solver", {"node_limit", "absolute_gap", "integrality_tol"});
    read(j["solver"], "node_limit", c.bnb.node_limit, "solver");
    read(j["solver"], "absolute_gap", c.bnb.absolute_gap, "solver");
    read(j["solver"], "integrality_tol", c.bnb.integrality_tol, "solver");
    if (!(c.bnb.absolute_gap > 0.0) || !(c.bnb.integrality_tol > 0.0)) {
      throw ConfigError("solver: tolerances must be positive");
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_run_config(in, path.parent_path());
}

void resolve_polytope(RunConfig& config) {
  const PolytopeSource& src = config.polytope;
  std::optional<StoragePolytope> poly;
  try {
    switch (src.kind) {
      case PolytopeSourceKind::Reference: poly = reference_pu_polytope(); break;
      case PolytopeSourceKind::Document: poly = read_polytope(src.path); break;
      case PolytopeSourceKind::Lines: poly = StoragePolytope::from_lines(*src.box, src.slopes, src.intercepts); break;
      case PolytopeSourceKind::Fit: {
        const auto samples = read_limit_samples(src.path);
        std::vector<LimitSample> upper, lower;
        for (const auto& s : samples) (s.side == LimitSide::DischargeUpper ? upper : lower).push_back(s);
        auto by_x = [](const LimitSample& a, const LimitSample& b) { return a.x < b.x; };
        std::sort(upper.begin(), upper.end(), by_x);
        std::sort(lower.begin(), lower.end(), by_x);
        const EnergyPowerBox box = src.box ? *src.box : sample_box(samples);
        poly = fit_polytope(upper, lower, src.upper_segments, src.lower_segments, box).polytope;
        break;
      }
    }
    if (src.rescale_to) {
      const auto& from = poly->box();
      const auto& to = *src.rescale_to;
      poly = poly->rescale(AffineMap::between(from.x_min, from.x_max, to.x_min, to.x_max),
                           AffineMap::between(from.p_min, from.p_max, to.p_min, to.p_max));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("polytope: ") + e.what());
  }
  config.params.battery.polytope = *poly;
}

EnergyPowerBox sample_box(std::span<const LimitSample> samples) {
  if (samples.empty()) throw std::invalid_argument("no limit samples");
  EnergyPowerBox b{samples[0].x, samples[0].x, 0.0, 0.0};
  for (const auto& s : samples) {
    b.x_min = std::min(b.x_min, s.x);
    b.x_max = std::max(b.x_max, s.x);
    b.p_min = std::min(b.p_min, s.p);
    b.p_max = std::max(b.p_max, s.p);
  }
  return b;
}

Scenario make_scenario(const RunConfig& config, ControllerMode mode) {
  Scenario s;
  if (config.data) {
    const auto& d = *config.data;
    s.params = config.params;
    s.duration_h = d.duration_h;
    TimeseriesOptions opt;
    opt.dt_plant_min = config.params.dt_plant_h * 60.0;
    opt.steps = s.plant_steps();
    opt.divide_by = d.load_in_kw ? config.params.base_power_kw : 1.0;
    s.load = load_timeseries_csv(d.load_csv, opt);
    opt.divide_by = 1.0;
    s.irradiance = load_timeseries_csv(d.irradiance_csv, opt);
  } else {
    SyntheticSettings syn = config.synthetic.value_or(SyntheticSettings{});
    syn.seed = config.seed;
    s = generate_synthetic_scenario(syn, config.params);
  }
  s.x0 = config.x0;
  s.delta_fc0 = config.delta_fc0;
  s.mode = mode;
  s.plant_input = config.plant_input;
  s.bnb = config.bnb;
  return s;
}

ValidationResult validate_config(const RunConfig& config) {
  ValidationResult r = validate(config.params);
  const auto& box = config.params.battery.polytope.box();
  if (config.x0 < box.x_min || config.x0 > box.x_max) {
    r.warnings.push_back("initial energy lies outside the storage box and will be clamped");
  }
  if (config.delta_fc0 != 0 && config.delta_fc0 != 1) r.errors.push_back("initial fuel-cell state must be 0 or 1");
  const double duration = config.data ? config.data->duration_h : config.synthetic->duration_h;
  if (r.ok()) {
    const double windows = duration / config.params.dt_mpc_h;
    if (!(duration > 0.0) || std::abs(windows - std::round(windows)) > 1e-9) {
      r.errors.push_back("scenario duration must be a positive multiple of the controller sample time");
    }
  }
  if (config.synthetic && (config.synthetic->noise < 0.0 || config.synthetic->noise >= 1.0)) {
    r.errors.push_back("synthetic noise must lie in [0, 1)");
  }
  return r;
}

}  // namespace mgrid::io
