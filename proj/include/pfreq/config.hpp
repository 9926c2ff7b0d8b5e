#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pfreq {

enum class ConfigFormat { Json, Toml };

struct GeometrySpec {
  std::string kind = "torus";  // torus | sphere | icosphere | mesh
  double period_x = 0.0;       // 0 means 2 pi
  double period_y = 0.0;
  int nx = 64;
  int ny = 64;
  double radius = 1.0;
  int subdivision = 4;
  std::string mesh_path;
  int basepoint = 0;

  bool operator==(const GeometrySpec&) const = default;
};

/// eigenmode(k), random-bandlimited(seed, band) or bump(center, width).
struct InitialDataSpec {
  std::string preset = "eigenmode";
  int mode = 1;
  std::uint64_t seed = 1;
  int band = 4;
  int center = 0;
  double width = 0.5;

  std::string to_string() const;
  static InitialDataSpec parse(std::string_view text);
  bool operator==(const InitialDataSpec&) const = default;
};

struct TimeGridSpec {
  double t_min = 0.01;
  double t_max = 1.0;
  int points = 200;
  std::string spacing = "log";  // log | uniform
  double horizon = 0.0;         // 0 means t_max

  std::vector<double> times() const;
  bool operator==(const TimeGridSpec&) const = default;
};

struct ToleranceSpec {
  double monotonicity = 1e-6;
  double harnack = 1e-3;
  double identity = 1e-4;
  double vanishing = 1e-3;

  bool operator==(const ToleranceSpec&) const = default;
};

struct FrequencySpec {
  int basis_size = 200;
  int analytic_modes = 256;
  bool with_w = false;
  double vanishing_t0 = 0.5;
  double weighted_distance_t_max = 0.05;
  double d_lower_eps = 0.5;

  bool operator==(const FrequencySpec&) const = default;
};

struct HarnackSpec {
  double t_min = 0.05;
  double t_max = 1.0;
  int points = 6;
  double eps = 0.5;

  bool operator==(const HarnackSpec&) const = default;
};

struct RicciFlowSpec {
  std::string background = "spectral";  // spectral | mesh
  int band = 16;
  int subdivision = 3;
  double delta = 0.05;
  double t_end = 0.3;
  double dt = 1e-3;
  InitialDataSpec v_end{"eigenmode", 2, 1, 4, 0, 0.5};
  int stride = 10;
  std::vector<double> harnack_times{0.05, 0.1, 0.2, 0.3};
  bool checkpoint = true;

  bool operator==(const RicciFlowSpec&) const = default;
};

struct ExperimentConfig {
  std::string experiment = "frequency";  // frequency | harnack | kernel-bounds | ricci-flow | all
  GeometrySpec geometry;
  InitialDataSpec initial_data;
  TimeGridSpec time_grid;
  ToleranceSpec tolerances;
  FrequencySpec frequency;
  HarnackSpec harnack;
  HarnackSpec kernel_bounds{0.05, 1.0, 12, 0.5};
  RicciFlowSpec ricci_flow;
  std::string output = "pfreq-out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys, wrong types and invalid presets raise
/// ConfigError; syntax errors raise ParseError with line and column.
ExperimentConfig parse_config(std::string_view text, ConfigFormat format);
ExperimentConfig load_config(const std::string& path);

/// Full form with every default spelled out.
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string to_toml(const ExperimentConfig& cfg);
ExperimentConfig from_json(const nlohmann::json& j);

/// FNV-1a of the canonical JSON text.
std::string config_hash(const ExperimentConfig& cfg);

/// Reader for the TOML subset used by configs: tables, dotted keys, strings,
/// numbers, booleans, arrays and inline tables.
nlohmann::json parse_toml(std::string_view text);

}  // namespace pfreq
