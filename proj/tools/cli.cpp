/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "cli.hpp"

#include "mgrid/io/config.hpp"
#include "mgrid/io/csv.hpp"
#include "mgrid/io/plots.hpp"
#include "mgrid/io/polytope_document.hpp"
#include "mgrid/io/report.hpp"
#include "mgrid/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace mgrid::cli {
namespace {

namespace fs = std::filesystem;

struct SimulateOptions {
  std::string config;
  std::string mode;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_h;
};

struct FitOptions {
  std::string samples;
  std::size_t upper_segments = 1;
  std::size_t lower_segments = 1;
  std::string out;
  std::vector<double> box;
};

struct CompareOptions {
  std::string first;
  std::string second;
};

// Thrown for problems with the user's inputs rather than with a computation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view directory_name(ControllerMode mode) {
  return mode == ControllerMode::WithPolytope ? "with" : "without";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

io::RunConfig load_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::load_run_config(path);
}

// Errors abort; warnings are printed and the run continues.
void check_config(const io::RunConfig& config, std::ostream& err) {
  const ValidationResult v = io::validate_config(config);
  for (const auto& w : v.warnings) err << "warning: " << w << '\n';
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw io::ConfigError(msg);
  }
}

int simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  io::RunConfig config = load_config(opt.config);
  if (!opt.mode.empty()) {
    if (opt.mode == "with") {
      config.modes = {ControllerMode::WithPolytope};
    } else if (opt.mode == "without") {
      config.modes = {ControllerMode::WithoutPolytope};
    } else {
      config.modes = {ControllerMode::WithPolytope, ControllerMode::WithoutPolytope};
    }
  }
  if (!opt.out.empty()) config.output_dir = opt.out;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.duration_h) {
    if (config.data) config.data->duration_h = *opt.duration_h;
    if (config.synthetic) config.synthetic->duration_h = *opt.duration_h;
  }
  io::resolve_polytope(config);
  check_config(config, err);

  for (ControllerMode mode : config.modes) {
    const Scenario scenario = io::make_scenario(config, mode);
    validate_scenario(scenario);
    const SimulationLog log = run_closed_loop(scenario);
    const ViolationReport report = summarize_violations(log);

    const fs::path dir = config.output_dir / directory_name(mode);
    fs::create_directories(dir);
    {
      auto f = open_output(dir / "trajectory.csv");
      io::write_trajectory_csv(log, f);
    }
    {
      auto f = open_output(dir / "report.json");
      io::write_report_json(log, report, f);
    }
    {
      auto f = open_output(dir / "timing.json");
      io::write_timing_json(log, f);
    }
    {
      auto f = open_output(dir / "trajectory.svg");
      io::render_trajectory_svg(log, scenario.params.battery.polytope, f);
    }
    {
      auto f = open_output(dir / "violations.svg");
      io::render_violation_histogram_svg(report, f);
    }
    out << to_string(mode) << ": " << report.violation_steps << " of " << report.total_steps
        << " steps with limit violations, results in " << dir.string() << '\n';
  }
  return kExitOk;
}

int fit(const FitOptions& opt, std::ostream& out) {
  if (!fs::exists(opt.samples)) throw UsageError("no such file: " + opt.samples);
  if (!opt.box.empty() && opt.box.size() != 4) throw UsageError("--box expects x_min x_max p_min p_max");
  const auto samples = io::read_limit_samples(fs::path(opt.samples));
  std::vector<LimitSample> upper, lower;
  for (const auto& s : samples) (s.side == LimitSide::DischargeUpper ? upper : lower).push_back(s);
  auto by_x = [](const LimitSample& a, const LimitSample& b) { return a.x < b.x; };
  std::sort(upper.begin(), upper.end(), by_x);
  std::sort(lower.begin(), lower.end(), by_x);
  const EnergyPowerBox box = opt.box.empty() ? io::sample_box(samples)
                                             : EnergyPowerBox{opt.box[0], opt.box[1], opt.box[2], opt.box[3]};
  const PolytopeFit result = fit_polytope(upper, lower, opt.upper_segments, opt.lower_segments, box);
  if (opt.out.empty()) {
    io::write_polytope(result.polytope, out);
  } else {
    auto f = open_output(opt.out);
    io::write_polytope(result.polytope, f);
  }
  out << "# residual " << result.residual() << '\n';
  return kExitOk;
}

int compare(const CompareOptions& opt, std::ostream& out) {
  for (const auto& p : {opt.first, opt.second}) {
    if (!fs::exists(p)) throw UsageError("no such file: " + p);
  }
  io::write_comparison(io::read_report_json(fs::path(opt.first)), io::read_report_json(fs::path(opt.second)), out);
  return kExitOk;
}

int validate_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
  io::RunConfig config = load_config(config_path);
  io::resolve_polytope(config);
  check_config(config, err);
  out << "configuration ok\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Microgrid energy management simulator", "mgsim"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the closed-loop simulation");
  sim_cmd->add_option("--config", sim.config, "JSON run configuration")->check(CLI::ExistingFile);
  sim_cmd->add_option("--mode", sim.mode, "Controller configuration")
      ->check(CLI::IsMember({"with", "without", "both"}));
  sim_cmd->add_option("--out", sim.out, "Output directory");
  sim_cmd->add_option("--seed", sim.seed, "Seed of the synthetic scenario");
  sim_cmd->add_option("--duration-h", sim.duration_h, "Simulated time in hours")->check(CLI::PositiveNumber);

  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit-polytope", "Fit a storage polytope to measured limits");
  fit_cmd->add_option("samples", fit_opt.samples, "CSV with columns x,p,side")->required();
  fit_cmd->add_option("--upper-segments", fit_opt.upper_segments, "Segments of the discharge envelope")
      ->check(CLI::Range(std::size_t{1}, std::size_t{8}));
  fit_cmd->add_option("--lower-segments", fit_opt.lower_segments, "Segments of the charge envelope")
      ->check(CLI::Range(std::size_t{1}, std::size_t{8}));
  fit_cmd->add_option("--out", fit_opt.out, "Polytope document to write (default: stdout)");
  fit_cmd->add_option("--box", fit_opt.box, "x_min x_max p_min p_max")->expected(4);

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Tabulate two report files side by side");
  cmp_cmd->add_option("first", cmp.first, "report.json")->required();
  cmp_cmd->add_option("second", cmp.second, "report.json")->required();

  std::string validate_config_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a configuration without running it");
  val_cmd->add_option("--config", validate_config_path, "JSON run configuration")->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*sim_cmd) return simulate(sim, out, err);
    if (*fit_cmd) return fit(fit_opt, out);
    if (*cmp_cmd) return compare(cmp, out);
    return validate_command(validate_config_path, out, err);
  } catch (const io::ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace mgrid::cli
