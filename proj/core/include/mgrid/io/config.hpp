/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/io/scenario.hpp"
#include "mgrid/model.hpp"
#include "mgrid/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgrid::io {

/// Raised for any problem with the content of a configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSource {
  std::filesystem::path load_csv;
  std::filesystem::path irradiance_csv;
  bool load_in_kw = true;  ///< otherwise the load file is already in pu
  double duration_h = 48.0;
};

enum class PolytopeSourceKind { Reference, Document, Fit, Lines };

struct PolytopeSource {
  PolytopeSourceKind kind = PolytopeSourceKind::Reference;
  std::filesystem::path path;           ///< Document or Fit
  std::size_t upper_segments = 1;       ///< Fit
  std::size_t lower_segments = 1;       ///< Fit
  std::optional<EnergyPowerBox> box;    ///< Fit (default: sample extents), Lines (required)
  std::vector<double> slopes;           ///< Lines
  std::vector<double> intercepts;       ///< Lines
  /// When set, the polytope is mapped from its own box onto this one.
  std::optional<EnergyPowerBox> rescale_to;
};

struct RunConfig {
  MicrogridParams params = default_params();
  std::optional<SyntheticSettings> synthetic = SyntheticSettings{};
  std::optional<DataSource> data;
  PolytopeSource polytope;
  double x0 = 1.5;
  int delta_fc0 = 0;
  std::vector<ControllerMode> modes{ControllerMode::WithPolytope, ControllerMode::WithoutPolytope};
  PlantInput plant_input = PlantInput::WindowMean;
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 7;
  BnbSettings bnb;
};

/// Parses a JSON configuration. Missing keys keep their defaults. Relative
/// paths are resolved against base_dir. Throws ConfigError.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Bounding box of a set of limit samples, widened to include zero power.
EnergyPowerBox sample_box(std::span<const LimitSample> samples);

/// Resolves the polytope source and installs it into config.params.
void resolve_polytope(RunConfig& config);

/// Builds the scenario for one controller mode (data files or synthetic generator).
Scenario make_scenario(const RunConfig& config, ControllerMode mode);

/// validate() on the parameters plus configuration-level checks.
ValidationResult validate_config(const RunConfig& config);

}  // namespace mgrid::io
