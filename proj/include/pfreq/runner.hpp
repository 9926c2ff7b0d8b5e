#pragma once

#include "pfreq/config.hpp"
#include "pfreq/geometry.hpp"
#include "pfreq/parallel.hpp"
#include "pfreq/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace pfreq {

struct Verdict {
  std::string group;  // experiment that produced it
  std::string name;
  std::string kind;   // monotonicity | positivity | identity | bound
  bool pass = true;
  nlohmann::json detail = nlohmann::json::object();
};

struct RunReport {
  std::string experiment;
  std::string config_hash;
  nlohmann::json config;
  std::vector<Verdict> verdicts;
  nlohmann::json constants = nlohmann::json::object();
  std::vector<std::string> files;  // relative to the output directory
  double wall_seconds = 0.0;
  std::string error;               // first module error, with experiment context

  bool all_pass() const;
  std::vector<std::string> groups() const;
  nlohmann::json to_json() const;
};

Geometry build_geometry(const GeometrySpec& spec);
std::shared_ptr<const SpectralBasis> build_basis(const Geometry& g, const ExperimentConfig& cfg);
ScalarField make_initial_data(const InitialDataSpec& spec, const Geometry& g, const SpectralBasis& basis);

/// Output root from PFREQ_OUTPUT_ROOT, else the working directory.
std::filesystem::path output_root();

/// Runs the selected suite under root / cfg.output. Every file is written
/// with a .partial suffix and renamed once its experiment finishes, so an
/// experiment that throws leaves only .partial files behind. Module errors
/// are caught into `error` and the remaining experiments still run.
RunReport run(const ExperimentConfig& cfg, const std::filesystem::path& root, Execution exec = Execution::Parallel);

/// 0 iff there is no module error and every monotonicity and positivity
/// verdict passes. Identity and bound verdicts are reported only.
int exit_code(const RunReport& report);

/// Gnuplot script plotting the named columns of a CSV trace against its
/// first column; the trace is referenced by file name.
std::string emit_plot_script(const std::filesystem::path& trace, const std::vector<std::string>& columns,
                             const std::string& title);

/// Default "all" configuration for `verify-all --geometry <name>`.
ExperimentConfig verify_all_config(const std::string& geometry);

}  // namespace pfreq
