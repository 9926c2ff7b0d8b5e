#include "pfreq/runner.hpp"

#include "pfreq/error.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/initial_data.hpp"
#include "pfreq/io.hpp"
#include "pfreq/mesh_io.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/ricciflow.hpp"
#include "pfreq/spherical_harmonics.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace pfreq {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

/// Files of one experiment, written as name.partial and renamed on commit.
class Staging {
 public:
  Staging(fs::path dir, std::string rel) : dir_(std::move(dir)), rel_(std::move(rel)) { fs::create_directories(dir_); }

  void put(const std::string& name, const std::string& content) {
    const fs::path partial = dir_ / (name + ".partial");
    std::ofstream os(partial, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + partial.string());
    os << content;
    if (!os.flush()) throw Error("write to " + partial.string() + " failed");
    pending_.push_back(name);
  }

  void commit(RunReport& rep) {
    for (const auto& name : pending_) {
      fs::rename(dir_ / (name + ".partial"), dir_ / name);
      rep.files.push_back(rel_.empty() ? name : rel_ + "/" + name);
    }
    pending_.clear();
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::string rel_;
  std::vector<std::string> pending_;
};

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  write_csv_row(os, header);
  for (const auto& r : rows) write_csv_row(os, r);
  return os.str();
}

Json verdicts_json(const std::vector<Verdict>& vs, const std::string& group, const Json& constants) {
  Json arr = Json::array();
  for (const auto& v : vs) {
    if (v.group != group) continue;
    arr.push_back({{"name", v.name}, {"kind", v.kind}, {"pass", v.pass}, {"detail", v.detail}});
  }
  return {{"experiment", group}, {"verdicts", arr}, {"constants", constants}};
}

void add(RunReport& rep, const std::string& group, const std::string& name, const std::string& kind, bool pass,
         Json detail) {
  rep.verdicts.push_back({group, name, kind, pass, std::move(detail)});
}

double sphere_y20(const Vec3& p) {
  const double z = p.z() / p.norm();
  return std::sqrt(5.0 / (16.0 * std::numbers::pi)) * (3 * z * z - 1);
}

// ---------------------------------------------------------------------------

void frequency_experiment(const ExperimentConfig& cfg, const Geometry& g, std::shared_ptr<const SpectralBasis> basis,
                          Staging& out, RunReport& rep, Execution exec) {
  const std::string group = "frequency";
  FrequencyConfig fc;
  fc.geometry = g;
  fc.basis = basis;
  fc.u0 = make_initial_data(cfg.initial_data, g, *basis);
  fc.basepoint = g.basepoint();
  fc.times = cfg.time_grid.times();
  fc.horizon = cfg.time_grid.horizon > 0 ? cfg.time_grid.horizon : cfg.time_grid.t_max;
  fc.with_w = cfg.frequency.with_w && g.is_analytic();
  const FrequencyEvaluator ev(fc, exec);
  const Trace trace = frequency_trace(ev, exec);
  const double tol = cfg.tolerances.monotonicity;

  Json constants = {{"provenance", trace.provenance}};
  const auto n = monotonicity_verdict(trace, TraceQuantity::N, tol);
  add(rep, group, "N nondecreasing", "monotonicity", n.pass, n.to_json());
  if (g.is_analytic()) {
    const auto i = monotonicity_verdict(trace, TraceQuantity::I, tol);
    add(rep, group, "I nondecreasing (parallel Ricci model)", "monotonicity", i.pass, i.to_json());
  }
  const IdentityReport id = check_ZD_identities(trace, g.curvature_lower_bound(), tol);
  add(rep, group, id.d_monotone.quantity + " nondecreasing", "monotonicity", id.d_monotone.pass, id.d_monotone.to_json());
  if (id.checked) {
    add(rep, group, "Z' = 2D", "identity", id.max_relative_error < cfg.tolerances.identity, id.to_json());
  } else {
    constants["identity_notice"] = id.notice;
  }

  // Vanishing-order bound at the grid time closest to the requested t0.
  double t0 = fc.times.front();
  for (double t : fc.times)
    if (std::abs(t - cfg.frequency.vanishing_t0) < std::abs(t0 - cfg.frequency.vanishing_t0)) t0 = t;
  const VanishingOrderReport vo = vanishing_order_bound(trace, t0, cfg.tolerances.vanishing);
  add(rep, group, "vanishing-order bound", "bound", vo.pass, vo.to_json());

  std::vector<double> wd_times;
  for (double t : fc.times)
    if (t <= cfg.frequency.weighted_distance_t_max) wd_times.push_back(t);
  if (wd_times.empty()) wd_times.push_back(fc.times.front());
  const WeightedDistanceScan wd = weighted_distance_scan(ev, wd_times, exec);
  Json wd_detail = wd.to_json();
  wd_detail["requested_t_max"] = cfg.frequency.weighted_distance_t_max;
  wd_detail["holds_on_whole_range"] = wd.largest_passing_prefix_t == wd_times.back();
  add(rep, group, "weighted-distance inequality near t = 0", "bound", !wd.rows.empty() && wd.rows.front().pass,
      wd_detail);

  constants["d_lower"] = d_lower_bound_diagnostic(trace, cfg.frequency.d_lower_eps).to_json();
  constants["a0"] = ev.a0();
  constants["raw_scale"] = ev.raw_scale();
  rep.constants[group] = constants;

  std::vector<std::vector<double>> rows;
  for (const auto& r : trace.rows) {
    std::vector<double> v{r.t, r.Z, r.D, r.I, r.N};
    if (trace.has_w) v.push_back(r.W);
    rows.push_back(v);
  }
  out.put("trace.csv", csv_table(trace.columns(), rows));
  out.put("verdicts.json", verdicts_json(rep.verdicts, group, constants).dump(2) + "\n");
}

void harnack_experiment(const ExperimentConfig& cfg, const Geometry& g, std::shared_ptr<const SpectralBasis> basis,
                        Staging& out, RunReport& rep, Execution exec) {
  const std::string group = "harnack";
  const HarnackSpec& hs = cfg.harnack;
  const std::vector<double> times =
      hs.points > 1 ? time_grid(hs.t_min, hs.t_max, static_cast<std::size_t>(hs.points)) : std::vector<double>{hs.t_min};
  Json constants = Json::object();
  double c0 = 0.0;
  const bool deficit = !g.is_analytic();
  if (deficit) {
    // Meshes carry no parallel-Ricci structure; use the deficit with a fitted C0.
    const KernelSamples ks = sample_kernels(g, basis.get(), g.basepoint(), times, true, exec);
    const FittedConstant b = fit_bound_constant(ks, BoundForm::Gradient);
    const FittedConstant c = fit_bound_constant(ks, BoundForm::BOfA, b.value);
    c0 = c.value;
    constants["B"] = b.to_json();
    constants["C0"] = c.to_json();
    constants["eps"] = hs.eps;
  }
  const Eigen::VectorXd dist = geodesic_distance(g).values;
  std::vector<std::vector<double>> rows;
  HessianOptions opt;
  opt.exec = exec;
  for (double t : times) {
    const HeatKernelField h = heat_kernel(g, basis.get(), g.basepoint(), t, exec);
    const TensorField tf = harnack_tensor(h, g, opt);
    const Eigen::VectorXd lower = deficit ? kernel_harnack_deficit(dist, t, hs.eps, c0) : Eigen::VectorXd();
    const double tol = cfg.tolerances.harnack / (2 * t);
    const PositivityVerdict v = check_positivity(tf, lower, tol);
    Json d = v.to_json();
    d["t"] = t;
    d["method"] = tf.method;
    std::ostringstream name;
    name << "Hess log H + g/2t >= " << (deficit ? "-eps(C0 + d^2/4t)" : "0") << " at t = " << format_double(t);
    add(rep, group, name.str(), "positivity", v.pass, d);
    rows.push_back({t, v.min_eigenvalue, 2 * t * v.min_eigenvalue, static_cast<double>(v.violations),
                    static_cast<double>(v.unreliable)});
  }
  rep.constants[group] = constants;
  out.put("trace.csv", csv_table({"t", "min_eigenvalue", "scaled_min_eigenvalue", "violations", "unreliable"}, rows));
  out.put("verdicts.json", verdicts_json(rep.verdicts, group, constants).dump(2) + "\n");
  out.put("plot.gp", emit_plot_script(out.dir() / "trace.csv.partial", {"scaled_min_eigenvalue"}, "matrix Harnack"));
}

void kernel_bounds_experiment(const ExperimentConfig& cfg, const Geometry& g, std::shared_ptr<const SpectralBasis> basis,
                              Staging& out, RunReport& rep, Execution exec) {
  const std::string group = "kernel-bounds";
  const HarnackSpec& ks = cfg.kernel_bounds;
  const auto coarse = time_grid(ks.t_min, ks.t_max, static_cast<std::size_t>(std::max(2, ks.points)));
  const auto fine = time_grid(ks.t_min, ks.t_max, static_cast<std::size_t>(2 * std::max(2, ks.points) - 1));
  const KernelSamples sc = sample_kernels(g, basis.get(), g.basepoint(), coarse, true, exec);
  const KernelSamples sf = sample_kernels(g, basis.get(), g.basepoint(), fine, true, exec);
  Json constants = Json::object();
  std::ostringstream csv;
  write_csv_row(csv, std::vector<std::string>{"form", "value", "log_value", "slack_min", "slack_median", "slack_max",
                                              "refined_value"});
  double b_coarse = 0.0, b_fine = 0.0;
  for (BoundForm form : {BoundForm::UpperKernel, BoundForm::LowerKernel, BoundForm::Gradient, BoundForm::BOfA}) {
    const std::string name(to_string(form));
    try {
      const FittedConstant c = fit_bound_constant(sc, form, b_coarse);
      const FittedConstant f = fit_bound_constant(sf, form, b_fine);
      if (form == BoundForm::Gradient) {
        b_coarse = c.value;
        b_fine = f.value;
      }
      constants[name] = c.to_json();
      constants[name]["refined_value"] = f.value;
      const bool ok = std::isfinite(c.value) && c.value > 0 && c.slack_min >= 0;
      add(rep, group, name + " constant finite and positive", "bound", ok, c.to_json());
      const double drift = std::abs(f.value - c.value) / std::abs(c.value);
      add(rep, group, name + " constant stable under refinement", "bound", drift <= 0.2,
          {{"coarse", c.value}, {"refined", f.value}, {"relative_change", drift}});
      write_csv_row(csv, std::vector<std::string>{name, format_double(c.value), format_double(c.log_value),
                                                  format_double(c.slack_min), format_double(c.slack_median),
                                                  format_double(c.slack_max), format_double(f.value)});
    } catch (const Error& e) {
      add(rep, group, name + " constant finite and positive", "bound", false, {{"error", e.what()}});
    }
  }
  rep.constants[group] = constants;
  out.put("fits.csv", csv.str());
  out.put("verdicts.json", verdicts_json(rep.verdicts, group, constants).dump(2) + "\n");
}

void ricci_flow_experiment(const ExperimentConfig& cfg, Staging& out, RunReport& rep, Execution exec) {
  const std::string group = "ricci-flow";
  const RicciFlowSpec& rs = cfg.ricci_flow;
  const double radius = cfg.geometry.kind == "sphere" || cfg.geometry.kind == "icosphere" ? cfg.geometry.radius : 1.0;
  std::shared_ptr<const ConformalBackground> bg;
  std::shared_ptr<const SpectralBasis> vb;
  if (rs.background == "spectral") {
    bg = spectral_background(radius, rs.band, rs.subdivision);
    const Geometry& sg = bg->geometry();
    const auto modes = static_cast<std::size_t>(sh_count(std::min(rs.band, 15)));
    vb = std::make_shared<const SpectralBasis>(eigenbasis(sg, operators(sg, MassKind::Lumped, modes), modes));
  } else {
    bg = mesh_background(Geometry::from_mesh(icosphere(rs.subdivision, radius)));
    const Geometry& mg = bg->geometry();
    vb = std::make_shared<const SpectralBasis>(eigenbasis(mg, operators(mg), 64));
  }
  const Geometry& sg = bg->geometry();
  ScalarField u_init;
  u_init.values.resize(static_cast<Eigen::Index>(sg.sample_count()));
  for (std::size_t i = 0; i < sg.sample_count(); ++i)
    u_init.values[static_cast<Eigen::Index>(i)] = rs.delta * sphere_y20(sg.position(i));
  if (sg.is_analytic()) u_init.exact = [d = rs.delta](const Vec3& p) { return d * sphere_y20(p); };

  const FlowState s0 = init_flow(bg, u_init);
  const FlowTrajectory traj = run_flow(s0, rs.t_end, rs.dt);
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, make_initial_data(rs.v_end, sg, *vb));
  const JTrace jt = j_trace(traj, sol, cfg.tolerances.monotonicity, rs.stride, exec);

  Json constants = {{"trajectory", traj.summary()}, {"j_trace", jt.summary()}};
  if (!sol.notice.empty()) constants["notice"] = sol.notice;
  add(rep, group, "Gauss-Bonnet total curvature conserved", "identity", traj.max_gauss_bonnet_drift < 1e-3,
      {{"max_relative_drift", traj.max_gauss_bonnet_drift}});
  add(rep, group, "J nondecreasing", "monotonicity", jt.j_verdict["pass"].get<bool>(), jt.j_verdict);
  add(rep, group, "t lambda_R nondecreasing", "monotonicity", jt.t_lambda_verdict["pass"].get<bool>(),
      jt.t_lambda_verdict);
  add(rep, group, "d(den)/dt = 2 num", "identity", jt.den_identity_error < 1e-3,
      {{"max_relative_error", jt.den_identity_error}, {"stride", rs.stride}});
  constants["measure_identity_max_residual"] = traj.max_measure_residual();

  HessianOptions opt;
  opt.exec = exec;
  for (double ht : rs.harnack_times) {
    if (ht > traj.states.back().t + 1e-12) {
      constants["harnack_skipped"].push_back(ht);
      continue;
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i)
      if (std::abs(traj.states[i].t - ht) < std::abs(traj.states[best].t - ht)) best = i;
    const FlowState& s = traj.states[best];
    if (!(s.t > 0)) continue;
    const FlowHarnackResult h =
        surface_flow_harnack(s.curvature_field(), s.conformal_field(), sg, s.t, cfg.tolerances.harnack * s.max_curvature(), opt);
    Json d = h.verdict.to_json();
    d["t"] = s.t;
    add(rep, group, "Hess log R + (R + 1/t) g / 2 >= 0 at t = " + format_double(s.t), "positivity", h.verdict.pass, d);
  }
  rep.constants[group] = constants;

  std::vector<std::vector<double>> rows;
  for (const auto& r : jt.rows) rows.push_back({r.t, r.num, r.den, r.J, r.lambda_r, r.t_lambda_r});
  out.put("trace.csv", csv_table({"t", "num", "den", "J", "lambda_R", "t_lambda_R"}, rows));
  std::vector<std::vector<double>> flow_rows;
  for (const auto& d : traj.diagnostics) flow_rows.push_back({d.t, d.dt, d.min_curvature, d.max_curvature, d.gauss_bonnet_drift});
  out.put("flow.csv", csv_table({"t", "dt", "min_R", "max_R", "gauss_bonnet_drift"}, flow_rows));
  out.put("verdicts.json", verdicts_json(rep.verdicts, group, constants).dump(2) + "\n");
  if (rs.checkpoint) out.put("checkpoint.json", checkpoint_json(traj.states.back(), traj.summary()).dump(1) + "\n");
}

}  // namespace

bool RunReport::all_pass() const {
  if (!error.empty()) return false;
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

std::vector<std::string> RunReport::groups() const {
  std::vector<std::string> g;
  for (const auto& v : verdicts)
    if (std::find(g.begin(), g.end(), v.group) == g.end()) g.push_back(v.group);
  return g;
}

nlohmann::json RunReport::to_json() const {
  Json vs = Json::array();
  for (const auto& v : verdicts)
    vs.push_back({{"group", v.group}, {"name", v.name}, {"kind", v.kind}, {"pass", v.pass}, {"detail", v.detail}});
  Json j = {{"experiment", experiment},
            {"config_hash", config_hash},
            {"config", config},
            {"pass", all_pass()},
            {"verdict_groups", groups()},
            {"verdicts", vs},
            {"constants", constants},
            {"files", files},
            {"wall_clock_seconds", wall_seconds}};
  if (!error.empty()) j["error"] = error;
  return j;
}

Geometry build_geometry(const GeometrySpec& s) {
  const double two_pi = 2 * std::numbers::pi;
  Geometry g = [&] {
    if (s.kind == "torus")
      return Geometry::flat_torus(s.period_x > 0 ? s.period_x : two_pi, s.period_y > 0 ? s.period_y : two_pi, s.nx, s.ny);
    if (s.kind == "sphere") return Geometry::round_sphere(s.radius, s.subdivision);
    if (s.kind == "icosphere") return Geometry::from_mesh(icosphere(s.subdivision, s.radius));
    if (s.kind == "mesh") return load_mesh_file(s.mesh_path);
    throw ConfigError("unknown geometry kind '" + s.kind + "'");
  }();
  if (static_cast<std::size_t>(s.basepoint) >= g.sample_count())
    throw ConfigError("basepoint " + std::to_string(s.basepoint) + " exceeds the sample count " +
                      std::to_string(g.sample_count()));
  return g.with_basepoint(s.basepoint);
}

std::shared_ptr<const SpectralBasis> build_basis(const Geometry& g, const ExperimentConfig& cfg) {
  if (g.is_analytic()) {
    const auto n = static_cast<std::size_t>(cfg.frequency.analytic_modes);
    return std::make_shared<const SpectralBasis>(eigenbasis(g, operators(g, MassKind::Lumped, n), n));
  }
  return std::make_shared<const SpectralBasis>(
      eigenbasis(g, operators(g), static_cast<std::size_t>(cfg.frequency.basis_size)));
}

ScalarField make_initial_data(const InitialDataSpec& spec, const Geometry& g, const SpectralBasis& basis) {
  if (spec.preset == "eigenmode") return eigenmode_data(basis, static_cast<std::size_t>(spec.mode));
  if (spec.preset == "random-bandlimited") return random_bandlimited_data(basis, spec.seed, spec.band);
  if (spec.preset == "bump") {
    if (static_cast<std::size_t>(spec.center) >= g.sample_count()) throw ConfigError("bump center out of range");
    return bump_data(g, spec.center, spec.width);
  }
  throw ConfigError("unknown initial-data preset '" + spec.preset + "'");
}

fs::path output_root() {
  const char* env = std::getenv("PFREQ_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::current_path();
}

RunReport run(const ExperimentConfig& cfg, const fs::path& root, Execution exec) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.config = to_json(cfg);
  rep.config_hash = config_hash(cfg);
  const fs::path dir = root / cfg.output;
  fs::create_directories(dir);

  const bool all = cfg.experiment == "all";
  std::vector<std::string> suite;
  for (const char* e : {"frequency", "harnack", "kernel-bounds", "ricci-flow"})
    if (all || cfg.experiment == e) suite.emplace_back(e);

  std::optional<Geometry> geometry;
  std::shared_ptr<const SpectralBasis> basis;
  for (const auto& name : suite) {
    Staging out(all ? dir / name : dir, all ? name : "");
    try {
      if (name != "ricci-flow" && !geometry) {
        geometry = build_geometry(cfg.geometry);
        basis = build_basis(*geometry, cfg);
      }
      if (name == "frequency") frequency_experiment(cfg, *geometry, basis, out, rep, exec);
      if (name == "harnack") harnack_experiment(cfg, *geometry, basis, out, rep, exec);
      if (name == "kernel-bounds") kernel_bounds_experiment(cfg, *geometry, basis, out, rep, exec);
      if (name == "ricci-flow") ricci_flow_experiment(cfg, out, rep, exec);
      if (name == "frequency") {
        out.put("plot.gp", emit_plot_script(out.dir() / "trace.csv.partial", {"I", "N"}, "parabolic frequency"));
      }
      if (name == "ricci-flow") {
        out.put("plot.gp", emit_plot_script(out.dir() / "trace.csv.partial", {"J", "t_lambda_R"}, "Ricci flow"));
      }
      out.commit(rep);
    } catch (const std::exception& e) {
      if (rep.error.empty()) rep.error = name + ": " + e.what();
      else rep.error += "; " + name + ": " + e.what();
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.files.push_back("report.json");
  write_file_atomic(dir / "report.json", rep.to_json().dump(2) + "\n");
  return rep;
}

int exit_code(const RunReport& report) {
  if (!report.error.empty()) return 1;
  for (const auto& v : report.verdicts)
    if ((v.kind == "monotonicity" || v.kind == "positivity") && !v.pass) return 1;
  return 0;
}

std::string emit_plot_script(const fs::path& trace, const std::vector<std::string>& columns, const std::string& title) {
  std::ifstream is(trace);
  if (!is) throw Error("cannot open trace " + trace.string());
  std::string header;
  std::getline(is, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> names;
  std::stringstream hs(header);
  for (std::string c; std::getline(hs, c, ',');) names.push_back(c);
  if (names.size() < 2) throw ParseError("trace " + trace.string() + " has fewer than two columns");
  if (columns.empty()) throw ParameterError("no columns to plot");

  std::string file = trace.filename().string();
  const std::string suffix = ".partial";
  if (file.size() > suffix.size() && file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0)
    file.resize(file.size() - suffix.size());

  std::ostringstream os;
  os << "set datafile separator \",\"\n";
  os << "set title \"" << title << "\"\n";
  os << "set xlabel \"" << names[0] << "\"\n";
  os << "set key left top\n";
  os << "set grid\n";
  os << "plot ";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto it = std::find(names.begin(), names.end(), columns[i]);
    if (it == names.end()) throw ParameterError("unknown column '" + columns[i] + "' in " + file);
    const auto idx = static_cast<std::size_t>(it - names.begin()) + 1;
    if (i) os << ", \\\n     ";
    os << "\"" << file << "\" using 1:" << idx << " every ::1 with linespoints title \"" << columns[i] << "\"";
  }
  os << "\n";
  return os.str();
}

ExperimentConfig verify_all_config(const std::string& geometry) {
  ExperimentConfig c;
  c.experiment = "all";
  if (geometry == "torus" || geometry == "flat-torus") {
    c.geometry.kind = "torus";
  } else if (geometry == "sphere" || geometry == "round-sphere") {
    c.geometry.kind = "sphere";
  } else if (geometry == "icosphere") {
    c.geometry.kind = "icosphere";
    c.time_grid.t_min = 0.1;
    c.harnack.t_min = 0.2;
    c.kernel_bounds.t_min = 0.2;
  } else {
    throw ConfigError("verify-all knows torus, sphere and icosphere; got '" + geometry + "'");
  }
  c.initial_data = InitialDataSpec::parse("random-bandlimited(1, 4)");
  c.output = "verify-all-" + c.geometry.kind;
  return c;
}

}  // namespace pfreq
