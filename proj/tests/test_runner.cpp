#include "pfreq/config.hpp"
#include "pfreq/error.hpp"
#include "pfreq/io.hpp"
#include "pfreq/runner.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace pfreq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pfreq_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void check_manifest(const RunReport& rep, const fs::path& dir) {
  CHECK_FALSE(rep.files.empty());
  for (const auto& f : rep.files) {
    INFO(f);
    CHECK(fs::exists(dir / f));
    CHECK(fs::file_size(dir / f) > 0);
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    CHECK(entry.path().extension() != ".partial");
}

ExperimentConfig small_config(const std::string& experiment, const std::string& geometry) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.geometry.kind = geometry;
  c.time_grid.points = 30;
  c.harnack.points = 2;
  c.kernel_bounds.points = 3;
  c.ricci_flow.band = 8;
  c.ricci_flow.t_end = 0.06;
  c.ricci_flow.dt = 2e-3;
  c.ricci_flow.stride = 3;
  c.ricci_flow.harnack_times = {0.06};
  c.output = "out";
  return c;
}

}  // namespace

TEST_CASE("frequency on the torus writes trace, verdicts and plot script") {
  const auto root = scratch("smoke");
  const auto cfg = parse_config("experiment = \"frequency\"\ngeometry = \"torus\"\noutput = \"smoke\"\n", ConfigFormat::Toml);
  const RunReport rep = run(cfg, root);
  CHECK(rep.error.empty());
  CHECK(exit_code(rep) == 0);
  for (const char* f : {"trace.csv", "verdicts.json", "plot.gp", "report.json"}) {
    INFO(f);
    CHECK(fs::file_size(root / "smoke" / f) > 0);
  }
  check_manifest(rep, root / "smoke");
  const std::string header = read_file(root / "smoke" / "trace.csv").substr(0, 11);
  CHECK(header == "t,Z,D,I,N\r\n");
  const auto report = nlohmann::json::parse(read_file(root / "smoke" / "report.json"));
  CHECK(report["config_hash"] == config_hash(cfg));
  CHECK(report["wall_clock_seconds"].get<double>() >= 0.0);
}

TEST_CASE("ricci flow past extinction fails naming step_flow") {
  const auto root = scratch("extinct");
  ExperimentConfig cfg = small_config("ricci-flow", "sphere");
  cfg.ricci_flow.t_end = 0.6;
  const RunReport rep = run(cfg, root);
  CHECK(exit_code(rep) != 0);
  CHECK(rep.error.find("ricci-flow") != std::string::npos);
  CHECK(rep.error.find("step_flow") != std::string::npos);
  CHECK(fs::exists(root / "out" / "report.json"));
  CHECK_FALSE(fs::exists(root / "out" / "trace.csv"));
}

TEST_CASE("all on the sphere reports at least four verdict groups") {
  const auto root = scratch("all");
  const RunReport rep = run(small_config("all", "sphere"), root);
  INFO(rep.error);
  CHECK(rep.error.empty());
  CHECK(rep.groups().size() >= 4);
  check_manifest(rep, root / "out");
  CHECK(fs::exists(root / "out" / "ricci-flow" / "checkpoint.json"));
  CHECK(fs::exists(root / "out" / "kernel-bounds" / "fits.csv"));
}

TEST_CASE("identical configs give byte-identical traces") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  ExperimentConfig cfg = small_config("frequency", "sphere");
  cfg.initial_data = InitialDataSpec::parse("random-bandlimited(11, 3)");
  run(cfg, a, Execution::Parallel);
  run(cfg, b, Execution::Serial);
  CHECK(read_file(a / "out" / "trace.csv") == read_file(b / "out" / "trace.csv"));
}

TEST_CASE("exit status follows monotonicity and positivity verdicts") {
  RunReport rep;
  rep.verdicts.push_back({"g", "a", "monotonicity", true, {}});
  rep.verdicts.push_back({"g", "b", "bound", false, {}});
  CHECK(exit_code(rep) == 0);
  CHECK_FALSE(rep.all_pass());
  rep.verdicts.push_back({"g", "c", "positivity", false, {}});
  CHECK(exit_code(rep) == 1);
  RunReport err;
  err.error = "frequency: boom";
  CHECK(exit_code(err) == 1);
}

TEST_CASE("plot scripts") {
  const auto dir = scratch("plot");
  write_file_atomic(dir / "trace.csv", "t,Z,D,I,N\r\n0.1,1,2,3,4\r\n");

  const std::string one = emit_plot_script(dir / "trace.csv", {"N"}, "frequency");
  CHECK(one.find("\"trace.csv\" using 1:5") != std::string::npos);
  CHECK(one.find(dir.string()) == std::string::npos);
  CHECK(one == emit_plot_script(dir / "trace.csv", {"N"}, "frequency"));

  const std::string two = emit_plot_script(dir / "trace.csv", {"I", "N"}, "overlay");
  CHECK(two.find("using 1:4") != std::string::npos);
  CHECK(two.find("using 1:5") != std::string::npos);

  CHECK_THROWS_WITH_AS(emit_plot_script(dir / "trace.csv", {"Q"}, "x"), doctest::Contains("Q"), ParameterError);
  CHECK_THROWS(emit_plot_script(dir / "missing.csv", {"N"}, "x"));
}

TEST_CASE("bad geometry and preset references are reported") {
  const auto root = scratch("bad");
  ExperimentConfig cfg = small_config("frequency", "torus");
  cfg.geometry.basepoint = 1 << 20;
  const RunReport rep = run(cfg, root);
  CHECK(exit_code(rep) != 0);
  CHECK(rep.error.find("basepoint") != std::string::npos);
  CHECK_THROWS_AS(verify_all_config("klein-bottle"), ConfigError);
}
