// Command-line front end: run a config, run the default suite on a model
// geometry, or emit a gnuplot script for an existing trace.

#include "pfreq/config.hpp"
#include "pfreq/error.hpp"
#include "pfreq/io.hpp"
#include "pfreq/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

int report_and_exit(const pfreq::RunReport& rep, const std::filesystem::path& dir) {
  std::size_t passed = 0;
  for (const auto& v : rep.verdicts) {
    std::cout << (v.pass ? "pass  " : "FAIL  ") << v.group << ": " << v.name << "\n";
    passed += v.pass ? 1 : 0;
  }
  std::cout << passed << "/" << rep.verdicts.size() << " verdicts passed in " << rep.wall_seconds << " s; report at "
            << (dir / "report.json").string() << "\n";
  if (!rep.error.empty()) std::cerr << "error: " << rep.error << "\n";
  return pfreq::exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic frequency and Harnack experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> basepoint;
  bool serial = false;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a TOML or JSON config");
  run_cmd->add_option("config", config_path, "config file (.toml or .json)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--basepoint", basepoint, "sample index of the basepoint");
  run_cmd->add_flag("--serial", serial, "use the serial reference kernels");

  std::string geometry = "torus";
  auto* verify_cmd = app.add_subcommand("verify-all", "Run every experiment with defaults on a model geometry");
  verify_cmd->add_option("--geometry", geometry, "torus, sphere or icosphere")->required();
  verify_cmd->add_option("--basepoint", basepoint, "sample index of the basepoint");
  verify_cmd->add_flag("--serial", serial, "use the serial reference kernels");

  std::string trace;
  std::vector<std::string> columns;
  std::string title;
  std::string out_path;
  auto* plot_cmd = app.add_subcommand("plot", "Write a gnuplot script for a CSV trace");
  plot_cmd->add_option("trace", trace, "CSV trace")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--columns", columns, "columns to plot against the first one");
  plot_cmd->add_option("--title", title, "plot title");
  plot_cmd->add_option("-o,--output", out_path, "write the script here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto exec = serial ? pfreq::Execution::Serial : pfreq::Execution::Parallel;
    if (*run_cmd || *verify_cmd) {
      pfreq::ExperimentConfig cfg = *run_cmd ? pfreq::load_config(config_path) : pfreq::verify_all_config(geometry);
      if (basepoint) cfg.geometry.basepoint = *basepoint;
      const auto root = pfreq::output_root();
      const auto rep = pfreq::run(cfg, root, exec);
      return report_and_exit(rep, root / cfg.output);
    }
    if (*plot_cmd) {
      if (columns.empty()) columns = {"N"};
      if (title.empty()) title = std::filesystem::path(trace).stem().string();
      const std::string script = pfreq::emit_plot_script(trace, columns, title);
      if (out_path.empty()) {
        std::cout << script;
      } else {
        pfreq::write_file_atomic(out_path, script);
      }
      return 0;
    }
  } catch (const pfreq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
