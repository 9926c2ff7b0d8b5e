#include "pfreq/config.hpp"

#include "pfreq/error.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace pfreq {

namespace {

using Json = nlohmann::json;
using Positions = std::map<std::string, std::pair<int, int>>;

// ---------------------------------------------------------------------------
// TOML subset

class TomlReader {
 public:
  TomlReader(std::string_view text, Positions* positions) : s_(text), positions_(positions) {}

  Json parse() {
    Json root = Json::object();
    std::vector<std::string> table;
    std::set<std::string> defined_tables;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        get();
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        table = key_path();
        skip_ws();
        expect(']');
        const std::string name = join(table);
        if (!defined_tables.insert(name).second) fail("table [" + name + "] defined twice");
        Json* node = &root;
        for (const auto& k : table) {
          Json& child = (*node)[k];
          if (child.is_null()) child = Json::object();
          if (!child.is_object()) fail("key '" + k + "' is not a table");
          node = &child;
        }
        end_of_line();
        continue;
      }
      const int line = line_, col = col_;
      std::vector<std::string> key = key_path();
      skip_ws();
      expect('=');
      skip_ws();
      Json value = parse_value();
      std::vector<std::string> full = table;
      full.insert(full.end(), key.begin(), key.end());
      assign(root, full, std::move(value), line, col);
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Positions* positions_;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("TOML line " + std::to_string(line_) + ", column " + std::to_string(col_) + ": " + msg);
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
        continue;
      }
      break;
    }
  }
  void skip_ws_newlines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') get();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    get();
  }
  static std::string join(const std::vector<std::string>& k) {
    std::string out;
    for (std::size_t i = 0; i < k.size(); ++i) out += (i ? "." : "") + k[i];
    return out;
  }

  std::string bare_or_quoted_key() {
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) k += get();
    if (k.empty()) fail("expected a key");
    return k;
  }
  std::vector<std::string> key_path() {
    std::vector<std::string> path{bare_or_quoted_key()};
    skip_ws();
    while (peek() == '.') {
      get();
      skip_ws();
      path.push_back(bare_or_quoted_key());
      skip_ws();
    }
    return path;
  }

  void assign(Json& root, const std::vector<std::string>& path, Json value, int line, int col) {
    Json* node = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      Json& child = (*node)[path[i]];
      if (child.is_null()) child = Json::object();
      if (!child.is_object()) fail("key '" + path[i] + "' is not a table");
      node = &child;
    }
    if (node->contains(path.back())) fail("duplicate key '" + join(path) + "'");
    (*node)[path.back()] = std::move(value);
    if (positions_) (*positions_)[join(path)] = {line, col};
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      c = get();
      switch (c) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + c);
      }
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  Json parse_value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') {
      get();
      Json arr = Json::array();
      skip_ws_newlines();
      while (peek() != ']') {
        arr.push_back(parse_value());
        skip_ws_newlines();
        if (peek() == ',') {
          get();
          skip_ws_newlines();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      get();
      return arr;
    }
    if (c == '{') {
      get();
      Json obj = Json::object();
      skip_ws();
      while (peek() != '}') {
        const int line = line_, col = col_;
        auto key = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        Json* node = &obj;
        for (std::size_t i = 0; i + 1 < key.size(); ++i) node = &(*node)[key[i]];
        if (node->contains(key.back())) fail("duplicate key '" + key.back() + "'");
        (*node)[key.back()] = parse_value();
        (void)line;
        (void)col;
        skip_ws();
        if (peek() == ',') {
          get();
          skip_ws();
        } else if (peek() != '}') {
          fail("expected ',' or '}' in inline table");
        }
      }
      get();
      return obj;
    }
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string_view("+-._").find(peek()) != std::string_view::npos))
      tok += get();
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (char d : tok)
      if (d != '_') digits += d;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else if (!digits.empty() && digits[0] == '-') {
        const long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const unsigned long long v = std::stoull(digits[0] == '+' ? digits.substr(1) : digits, &used);
        if (used + (digits[0] == '+') == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + tok + "'");
  }
};

// ---------------------------------------------------------------------------
// Strict object reader

class Section {
 public:
  Section(const Json& j, std::string path, const Positions* pos) : j_(j), path_(std::move(path)), pos_(pos) {
    if (!j.is_object()) throw ConfigError(where() + "expected a table");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const Json& at(const std::string& key) const { return j_.at(key); }

  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
    out = v.get<double>();
  }
  void read(const std::string& key, int& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      throw ConfigError(where(key) + "integer out of range");
    out = static_cast<int>(x);
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
    out = v.get<bool>();
  }
  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
    out = v.get<std::string>();
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + "expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), path_.empty() ? key : path_ + "." + key, pos_);
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (seen_.count(k)) continue;
      const std::string full = path_.empty() ? k : path_ + "." + k;
      std::string at;
      if (pos_) {
        const auto it = pos_->find(full);
        if (it != pos_->end()) at = " (line " + std::to_string(it->second.first) + ", column " +
                                    std::to_string(it->second.second) + ")";
      }
      throw ConfigError("unknown key '" + full + "'" + at);
    }
  }

  std::string where(const std::string& key = "") const {
    std::string full = path_;
    if (!key.empty()) full = full.empty() ? key : full + "." + key;
    return full.empty() ? "" : "'" + full + "': ";
  }
  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  const Positions* pos_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

template <typename T>
bool one_of(const T& v, std::initializer_list<T> options) {
  return std::find(options.begin(), options.end(), v) != options.end();
}

InitialDataSpec read_initial_data(Section& parent, const std::string& key, InitialDataSpec def) {
  if (!parent.has(key)) return def;
  const Json& v = parent.at(key);
  if (v.is_string()) {
    try {
      return InitialDataSpec::parse(v.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(parent.where(key) + e.what());
    }
  }
  Section s = parent.sub(key);
  InitialDataSpec d;
  s.read("preset", d.preset);
  if (d.preset == "eigenmode") {
    s.read("mode", d.mode);
  } else if (d.preset == "random-bandlimited") {
    s.read("seed", d.seed);
    s.read("band", d.band);
  } else if (d.preset == "bump") {
    s.read("center", d.center);
    s.read("width", d.width);
  } else {
    throw ConfigError(s.where("preset") + "unknown initial-data preset '" + d.preset + "'");
  }
  s.finish();
  // Round-trip through the canonical text to validate ranges.
  return InitialDataSpec::parse(d.to_string());
}

void read_harnack(Section s, HarnackSpec& h) {
  s.read("t_min", h.t_min);
  s.read("t_max", h.t_max);
  s.read("points", h.points);
  s.read("eps", h.eps);
  s.finish();
  require(h.t_min > 0 && h.t_max >= h.t_min, s.where() + "need 0 < t_min <= t_max");
  require(h.points >= 1, s.where("points") + "must be at least 1");
  require(h.eps > 0, s.where("eps") + "must be positive");
}

void validate(const ExperimentConfig& c) {
  require(one_of<std::string>(c.experiment, {"frequency", "harnack", "kernel-bounds", "ricci-flow", "all"}),
          "'experiment': unknown experiment '" + c.experiment + "'");
  const GeometrySpec& g = c.geometry;
  require(one_of<std::string>(g.kind, {"torus", "sphere", "icosphere", "mesh"}),
          "'geometry.kind': unknown geometry '" + g.kind + "'");
  require(g.period_x >= 0 && g.period_y >= 0, "'geometry': periods must be non-negative (0 selects 2 pi)");
  require(g.nx >= 8 && g.ny >= 8, "'geometry': torus resolution must be at least 8");
  require(g.radius > 0, "'geometry.radius': must be positive");
  require(g.subdivision >= 0 && g.subdivision <= 7, "'geometry.subdivision': must lie in [0, 7]");
  require(g.basepoint >= 0, "'geometry.basepoint': must be non-negative");
  require(g.kind != "mesh" || !g.mesh_path.empty(), "'geometry.mesh_path': required for mesh geometries");
  const TimeGridSpec& t = c.time_grid;
  require(t.t_min > 0 && t.t_max > t.t_min, "'time_grid': need 0 < t_min < t_max");
  require(t.points >= 2, "'time_grid.points': must be at least 2");
  require(one_of<std::string>(t.spacing, {"log", "uniform"}), "'time_grid.spacing': expected log or uniform");
  require(t.horizon == 0 || t.horizon >= t.t_max, "'time_grid.horizon': must be 0 or at least t_max");
  const ToleranceSpec& tol = c.tolerances;
  require(tol.monotonicity >= 0 && tol.harnack >= 0 && tol.identity >= 0 && tol.vanishing >= 0,
          "'tolerances': must be non-negative");
  const FrequencySpec& f = c.frequency;
  require(f.basis_size >= 2 && f.analytic_modes >= 2, "'frequency': basis sizes must be at least 2");
  require(f.vanishing_t0 > 0 && f.weighted_distance_t_max > 0 && f.d_lower_eps > 0, "'frequency': times and eps must be positive");
  const RicciFlowSpec& r = c.ricci_flow;
  require(one_of<std::string>(r.background, {"spectral", "mesh"}), "'ricci_flow.background': expected spectral or mesh");
  require(r.band >= 1, "'ricci_flow.band': must be at least 1");
  require(r.subdivision >= 0 && r.subdivision <= 6, "'ricci_flow.subdivision': must lie in [0, 6]");
  require(r.dt > 0 && r.t_end > 0, "'ricci_flow': dt and t_end must be positive");
  require(r.stride >= 1, "'ricci_flow.stride': must be at least 1");
  for (double h : r.harnack_times) require(h > 0, "'ricci_flow.harnack_times': must be positive");
  require(!c.output.empty(), "'output': must not be empty");
}

std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += ch;
    }
  }
  return out + "\"";
}

std::string toml_value(const Json& v) {
  if (v.is_string()) return toml_string(v.get<std::string>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    std::string s = format_double(v.get<double>());
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + toml_value(v[i]);
    return s + "]";
  }
  throw ConfigError("cannot express value in TOML");
}

void emit_table(std::ostringstream& os, const Json& obj, const std::string& prefix) {
  for (const auto& [k, v] : obj.items())
    if (!v.is_object()) os << k << " = " << toml_value(v) << "\n";
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_object()) continue;
    const std::string name = prefix.empty() ? k : prefix + "." + k;
    os << "\n[" << name << "]\n";
    emit_table(os, v, name);
  }
}

ExperimentConfig from_tree(const Json& j, const Positions* pos) {
  ExperimentConfig c;
  Section root(j, "", pos);
  root.read("experiment", c.experiment);
  if (root.has("geometry")) {
    if (root.at("geometry").is_string()) {
      c.geometry.kind = root.at("geometry").get<std::string>();
    } else {
      Section g = root.sub("geometry");
      g.read("kind", c.geometry.kind);
      g.read("period_x", c.geometry.period_x);
      g.read("period_y", c.geometry.period_y);
      g.read("nx", c.geometry.nx);
      g.read("ny", c.geometry.ny);
      g.read("radius", c.geometry.radius);
      g.read("subdivision", c.geometry.subdivision);
      g.read("mesh_path", c.geometry.mesh_path);
      g.read("basepoint", c.geometry.basepoint);
      g.finish();
    }
  }
  c.initial_data = read_initial_data(root, "initial_data", c.initial_data);
  if (root.has("time_grid")) {
    Section t = root.sub("time_grid");
    t.read("t_min", c.time_grid.t_min);
    t.read("t_max", c.time_grid.t_max);
    t.read("points", c.time_grid.points);
    t.read("spacing", c.time_grid.spacing);
    t.read("horizon", c.time_grid.horizon);
    t.finish();
  }
  if (root.has("tolerances")) {
    Section t = root.sub("tolerances");
    t.read("monotonicity", c.tolerances.monotonicity);
    t.read("harnack", c.tolerances.harnack);
    t.read("identity", c.tolerances.identity);
    t.read("vanishing", c.tolerances.vanishing);
    t.finish();
  }
  if (root.has("frequency")) {
    Section f = root.sub("frequency");
    f.read("basis_size", c.frequency.basis_size);
    f.read("analytic_modes", c.frequency.analytic_modes);
    f.read("with_w", c.frequency.with_w);
    f.read("vanishing_t0", c.frequency.vanishing_t0);
    f.read("weighted_distance_t_max", c.frequency.weighted_distance_t_max);
    f.read("d_lower_eps", c.frequency.d_lower_eps);
    f.finish();
  }
  if (root.has("harnack")) read_harnack(root.sub("harnack"), c.harnack);
  if (root.has("kernel_bounds")) read_harnack(root.sub("kernel_bounds"), c.kernel_bounds);
  if (root.has("ricci_flow")) {
    Section r = root.sub("ricci_flow");
    r.read("background", c.ricci_flow.background);
    r.read("band", c.ricci_flow.band);
    r.read("subdivision", c.ricci_flow.subdivision);
    r.read("delta", c.ricci_flow.delta);
    r.read("t_end", c.ricci_flow.t_end);
    r.read("dt", c.ricci_flow.dt);
    c.ricci_flow.v_end = read_initial_data(r, "v_end", c.ricci_flow.v_end);
    r.read("stride", c.ricci_flow.stride);
    r.read("harnack_times", c.ricci_flow.harnack_times);
    r.read("checkpoint", c.ricci_flow.checkpoint);
    r.finish();
  }
  root.read("output", c.output);
  root.finish();
  validate(c);
  return c;
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string InitialDataSpec::to_string() const {
  if (preset == "eigenmode") return "eigenmode(" + std::to_string(mode) + ")";
  if (preset == "random-bandlimited") return "random-bandlimited(" + std::to_string(seed) + ", " + std::to_string(band) + ")";
  if (preset == "bump") return "bump(" + std::to_string(center) + ", " + format_double(width) + ")";
  return preset;
}

InitialDataSpec InitialDataSpec::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ConfigError("initial data '" + std::string(text) + "' is not of the form name(args)");
  }
  InitialDataSpec d;
  d.preset = std::string(trim(text.substr(0, open)));
  std::vector<std::string> args;
  std::string_view rest = text.substr(open + 1, text.size() - open - 2);
  while (!trim(rest).empty()) {
    const auto comma = rest.find(',');
    std::string_view a = trim(rest.substr(0, comma));
    const auto eq = a.find('=');
    if (eq != std::string_view::npos) a = trim(a.substr(eq + 1));  // keyword form, positional order kept
    args.emplace_back(a);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  auto as_int = [&](std::size_t i) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(args[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != args[i].size() || args[i].empty()) throw ConfigError("expected an integer argument, got '" + args[i] + "'");
    return v;
  };
  auto as_double = [&](std::size_t i) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(args[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != args[i].size() || args[i].empty()) throw ConfigError("expected a number argument, got '" + args[i] + "'");
    return v;
  };
  auto arity = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError(d.preset + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
  };
  if (d.preset == "eigenmode") {
    arity(1);
    d.mode = static_cast<int>(as_int(0));
    if (d.mode < 0) throw ConfigError("eigenmode index must be non-negative");
  } else if (d.preset == "random-bandlimited") {
    arity(2);
    const long long seed = as_int(0);
    if (seed < 0) throw ConfigError("seed must be non-negative");
    d.seed = static_cast<std::uint64_t>(seed);
    d.band = static_cast<int>(as_int(1));
    if (d.band < 0) throw ConfigError("band must be non-negative");
  } else if (d.preset == "bump") {
    arity(2);
    d.center = static_cast<int>(as_int(0));
    d.width = as_double(1);
    if (d.center < 0 || !(d.width > 0)) throw ConfigError("bump needs a non-negative center and positive width");
  } else {
    throw ConfigError("unknown initial-data preset '" + d.preset + "'");
  }
  return d;
}

std::vector<double> TimeGridSpec::times() const {
  return time_grid(t_min, t_max, static_cast<std::size_t>(points), spacing == "log");
}

nlohmann::json parse_toml(std::string_view text) { return TomlReader(text, nullptr).parse(); }

ExperimentConfig parse_config(std::string_view text, ConfigFormat format) {
  if (format == ConfigFormat::Toml) {
    Positions pos;
    const Json tree = TomlReader(text, &pos).parse();
    return from_tree(tree, &pos);
  }
  Json tree;
  try {
    tree = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("JSON line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  return from_tree(tree, nullptr);
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  return parse_config(text, toml ? ConfigFormat::Toml : ConfigFormat::Json);
}

ExperimentConfig from_json(const nlohmann::json& j) { return from_tree(j, nullptr); }

nlohmann::json to_json(const ExperimentConfig& c) {
  auto harnack = [](const HarnackSpec& h) {
    return Json{{"t_min", h.t_min}, {"t_max", h.t_max}, {"points", h.points}, {"eps", h.eps}};
  };
  const auto& g = c.geometry;
  const auto& r = c.ricci_flow;
  return {{"experiment", c.experiment},
          {"geometry",
           {{"kind", g.kind},
            {"period_x", g.period_x},
            {"period_y", g.period_y},
            {"nx", g.nx},
            {"ny", g.ny},
            {"radius", g.radius},
            {"subdivision", g.subdivision},
            {"mesh_path", g.mesh_path},
            {"basepoint", g.basepoint}}},
          {"initial_data", c.initial_data.to_string()},
          {"time_grid",
           {{"t_min", c.time_grid.t_min},
            {"t_max", c.time_grid.t_max},
            {"points", c.time_grid.points},
            {"spacing", c.time_grid.spacing},
            {"horizon", c.time_grid.horizon}}},
          {"tolerances",
           {{"monotonicity", c.tolerances.monotonicity},
            {"harnack", c.tolerances.harnack},
            {"identity", c.tolerances.identity},
            {"vanishing", c.tolerances.vanishing}}},
          {"frequency",
           {{"basis_size", c.frequency.basis_size},
            {"analytic_modes", c.frequency.analytic_modes},
            {"with_w", c.frequency.with_w},
            {"vanishing_t0", c.frequency.vanishing_t0},
            {"weighted_distance_t_max", c.frequency.weighted_distance_t_max},
            {"d_lower_eps", c.frequency.d_lower_eps}}},
          {"harnack", harnack(c.harnack)},
          {"kernel_bounds", harnack(c.kernel_bounds)},
          {"ricci_flow",
           {{"background", r.background},
            {"band", r.band},
            {"subdivision", r.subdivision},
            {"delta", r.delta},
            {"t_end", r.t_end},
            {"dt", r.dt},
            {"v_end", r.v_end.to_string()},
            {"stride", r.stride},
            {"harnack_times", r.harnack_times},
            {"checkpoint", r.checkpoint}}},
          {"output", c.output}};
}

std::string to_toml(const ExperimentConfig& cfg) {
  std::ostringstream os;
  emit_table(os, to_json(cfg), "");
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(to_json(cfg).dump())); }

}  // namespace pfreq
