#include "pfreq/config.hpp"
#include "pfreq/error.hpp"
#include "pfreq/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

using namespace pfreq;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config("experiment = \"frequency\"\ngeometry = \"torus\"\n", ConfigFormat::Toml);
  CHECK(c.experiment == "frequency");
  CHECK(c.geometry.kind == "torus");
  CHECK(c.time_grid.points == 200);
  CHECK(c.tolerances.monotonicity == 1e-6);
  CHECK(c.time_grid.times().size() == 200);

  const auto j = parse_config(R"({"experiment": "frequency", "geometry": "torus"})", ConfigFormat::Json);
  CHECK(j == c);
}

TEST_CASE("unknown keys are rejected by name") {
  const std::string toml = "experiment = \"frequency\"\ngeomtry = \"torus\"\n";
  const auto msg = message_of([&] { parse_config(toml, ConfigFormat::Toml); });
  CHECK(msg.find("geomtry") != std::string::npos);
  CHECK_THROWS_AS(parse_config(toml, ConfigFormat::Toml), ConfigError);

  const auto nested =
      message_of([] { parse_config(R"({"time_grid": {"t_min": 0.1, "pionts": 3}})", ConfigFormat::Json); });
  CHECK(nested.find("pionts") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  const auto toml = message_of([] { parse_config("experiment = \"frequency\"\ngeometry = [1, 2 x]\n", ConfigFormat::Toml); });
  INFO(toml);
  CHECK(toml.find("line 2, column 18") != std::string::npos);
  CHECK_THROWS_AS(parse_config("experiment = \n", ConfigFormat::Toml), ParseError);

  const auto json = message_of([] { parse_config("{\n  \"experiment\": ,\n}", ConfigFormat::Json); });
  CHECK(json.find("line 2") != std::string::npos);
}

TEST_CASE("invalid presets and values are rejected") {
  CHECK_THROWS_AS(parse_config("initial_data = \"wavelet(3)\"\n", ConfigFormat::Toml), ConfigError);
  CHECK_THROWS_AS(parse_config("experiment = \"everything\"\n", ConfigFormat::Toml), ConfigError);
  CHECK_THROWS_AS(parse_config("[time_grid]\nt_min = -1.0\n", ConfigFormat::Toml), ConfigError);
  CHECK_THROWS_AS(parse_config("[time_grid]\npoints = \"many\"\n", ConfigFormat::Toml), ConfigError);
  CHECK_THROWS_AS(InitialDataSpec::parse("eigenmode(-2)"), ConfigError);
}

TEST_CASE("initial-data presets parse both spellings") {
  const auto a = InitialDataSpec::parse("random-bandlimited(7, 3)");
  CHECK(a.preset == "random-bandlimited");
  CHECK(a.seed == 7);
  CHECK(a.band == 3);
  CHECK(InitialDataSpec::parse(a.to_string()) == a);

  const auto c = parse_config("[initial_data]\npreset = \"bump\"\ncenter = 5\nwidth = 0.25\n", ConfigFormat::Toml);
  CHECK(c.initial_data.preset == "bump");
  CHECK(c.initial_data.center == 5);
  CHECK(c.initial_data.width == 0.25);
}

TEST_CASE("full ricci-flow config round-trips through both formats") {
  ExperimentConfig c;
  c.experiment = "ricci-flow";
  c.geometry.kind = "sphere";
  c.geometry.radius = 1.5;
  c.ricci_flow.band = 12;
  c.ricci_flow.delta = 0.03;
  c.ricci_flow.t_end = 0.25;
  c.ricci_flow.dt = 5e-4;
  c.ricci_flow.harnack_times = {0.05, 0.125, 0.25};
  c.ricci_flow.v_end = InitialDataSpec::parse("random-bandlimited(3, 2)");
  c.ricci_flow.checkpoint = false;
  c.time_grid.spacing = "uniform";
  c.output = "out dir, with \"quotes\"";

  const auto from_toml = parse_config(to_toml(c), ConfigFormat::Toml);
  CHECK(from_toml == c);
  const auto from_json_text = parse_config(to_json(c).dump(), ConfigFormat::Json);
  CHECK(from_json_text == c);
  CHECK(to_toml(from_toml) == to_toml(c));
  CHECK(config_hash(from_toml) == config_hash(c));

  ExperimentConfig d = c;
  d.ricci_flow.dt = 1e-3;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("toml subset reader") {
  const auto j = parse_toml(R"(# comment
name = "x" # trailing
a.b = 1
[t]
list = [1, 2.5, -3e-2]
inline = { k = true, s = 'lit' }
)");
  CHECK(j["name"] == "x");
  CHECK(j["a"]["b"] == 1);
  CHECK(j["t"]["list"][2].get<double>() == doctest::Approx(-0.03));
  CHECK(j["t"]["inline"]["k"] == true);
  CHECK(j["t"]["inline"]["s"] == "lit");
  CHECK_THROWS_AS(parse_toml("[t]\n[t]\n"), ParseError);
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  write_csv_row(os, std::vector<double>{1.0, 0.5});
  CHECK(os.str() == "1,0.5\r\n");
}

TEST_CASE("atomic writes leave no partial file") {
  const auto dir = std::filesystem::temp_directory_path() / "pfreq_test_config";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.txt";
  write_file_atomic(path, "hello");
  CHECK(read_file(path) == "hello");
  CHECK_FALSE(std::filesystem::exists(dir / "x.txt.partial"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_config chooses the format by suffix") {
  const auto dir = std::filesystem::temp_directory_path() / "pfreq_test_load";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.toml", "experiment = \"harnack\"\n");
  write_file_atomic(dir / "a.json", "{\"experiment\": \"harnack\"}");
  CHECK(load_config((dir / "a.toml").string()).experiment == "harnack");
  CHECK(load_config((dir / "a.json").string()).experiment == "harnack");
  CHECK_THROWS(load_config((dir / "missing.toml").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("shipped configs parse") {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PFREQ_CONFIG_DIR)) {
    INFO(entry.path().string());
    const ExperimentConfig c = load_config(entry.path().string());
    CHECK(parse_config(to_toml(c), ConfigFormat::Toml) == c);
    ++count;
  }
  CHECK(count >= 4);
}
