// Exit gate: one PASS/FAIL line per acceptance criterion, nonzero exit if any
// criterion fails. Closed-form oracles are computed here, independently of the
// library pipelines they check.

#include "pfreq/frequency.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/initial_data.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/ricciflow.hpp"
#include "pfreq/spectral.hpp"
#include "pfreq/spherical_harmonics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

ScalarField sampled(const Geometry& g, std::function<double(const Vec3&)> fn) {
  ScalarField f;
  f.values.resize(static_cast<Eigen::Index>(g.sample_count()));
  for (std::size_t i = 0; i < g.sample_count(); ++i) f.values[static_cast<Eigen::Index>(i)] = fn(g.position(i));
  f.exact = std::move(fn);
  return f;
}

std::shared_ptr<const SpectralBasis> basis_of(const Geometry& g, std::size_t n = 256) {
  return std::make_shared<const SpectralBasis>(eigenbasis(g, operators(g), n));
}

FrequencyConfig frequency_config(const Geometry& g, std::shared_ptr<const SpectralBasis> b, ScalarField u0,
                                 std::vector<double> times) {
  FrequencyConfig c;
  c.geometry = g;
  c.basis = std::move(b);
  c.u0 = std::move(u0);
  c.basepoint = g.basepoint();
  c.horizon = times.back();
  c.times = std::move(times);
  return c;
}

Geometry two_pi_torus(int n = 64) { return Geometry::flat_torus(2 * kPi, 2 * kPi, n, n); }

double cos_x(const Vec3& p) { return std::cos(p.x()); }

double y20(const Vec3& p) {
  const double z = p.z() / p.norm();
  return std::sqrt(5.0 / (16.0 * kPi)) * (3 * z * z - 1);
}

// ---------------------------------------------------------------------------

void derivative_identity(Outcome& out) {
  const Geometry g = two_pi_torus();
  const auto b = basis_of(g);
  std::vector<double> times;
  for (int k = 0; k <= 950; ++k) times.push_back(0.05 + 1e-3 * k);
  const Trace tr = frequency_trace(frequency_config(g, b, sampled(g, cos_x), times));
  const IdentityReport id = check_ZD_identities(tr, 0.0);
  out.require(id.checked, "uniform grid not recognised");
  out.require(id.max_relative_error < 1e-4, "Z' = 2D");
  double worst = 0.0;
  for (const auto& r : tr.rows) {
    const double oracle = r.t * std::tanh(2 * r.t);
    worst = std::max(worst, std::abs(r.I - oracle) / oracle);
  }
  out.require(worst < 1e-6, "I = t tanh 2t");
  out.detail << "max |Z' - 2D|/2D = " << id.max_relative_error << ", max |I - t tanh 2t|/I = " << worst;
}

void frequency_monotonicity(Outcome& out) {
  int cases = 0;
  double worst = 0.0;
  for (const Geometry& g : {two_pi_torus(), Geometry::round_sphere(1.0, 4)}) {
    const auto b = basis_of(g);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Trace tr =
          frequency_trace(frequency_config(g, b, random_bandlimited_data(*b, seed, 4), time_grid(0.01, 1.0, 200)));
      const auto n = monotonicity_verdict(tr, TraceQuantity::N, 1e-6);
      const auto i = monotonicity_verdict(tr, TraceQuantity::I, 1e-6);
      const std::string tag = std::string(to_string(g.kind())) + " seed " + std::to_string(seed);
      out.require(n.pass, "N on " + tag);
      out.require(i.pass, "I on " + tag);
      worst = std::max({worst, n.worst_violation, i.worst_violation});
      ++cases;
    }
  }
  out.detail << cases << " seeded traces, worst relative decrease " << worst;
}

void matrix_harnack(Outcome& out) {
  double worst = 0.0;
  for (const Geometry& g : {two_pi_torus(), Geometry::round_sphere(1.0, 4)}) {
    for (double t : time_grid(0.05, 1.0, 8)) {
      const TensorField ht = harnack_tensor(heat_kernel(g, nullptr, g.basepoint(), t), g);
      const PositivityVerdict v = check_positivity(ht, Eigen::VectorXd(), 1e-3 / (2 * t));
      out.require(v.pass, std::string(to_string(g.kind())) + " t = " + std::to_string(t));
      worst = std::min(worst, v.min_eigenvalue * 2 * t);
    }
  }
  // Gaussian equality case at the source.
  const Geometry g = two_pi_torus();
  const double t = 0.01;
  const TensorField ht = harnack_tensor(heat_kernel(g, nullptr, 0, t), g);
  const double frob = ht.tensors[0].norm() * 2 * t;
  out.require(frob < 0.01, "equality case at the source");
  out.detail << "min 2t * eigenvalue = " << worst << ", source Frobenius * 2t = " << frob;
}

void kernel_bounds(Outcome& out) {
  struct Model {
    Geometry coarse, fine;
  };
  const std::vector<Model> models{{two_pi_torus(32), two_pi_torus(64)},
                                  {Geometry::round_sphere(1.0, 3), Geometry::round_sphere(1.0, 4)}};
  for (const Model& m : models) {
    const KernelSamples a = sample_kernels(m.coarse, nullptr, 0, time_grid(0.05, 1.0, 12), false);
    const KernelSamples b = sample_kernels(m.fine, nullptr, 0, time_grid(0.05, 1.0, 23), false);
    for (BoundForm form : {BoundForm::UpperKernel, BoundForm::LowerKernel}) {
      const std::string tag = std::string(to_string(m.coarse.kind())) + " " + std::string(to_string(form));
      const FittedConstant ca = fit_bound_constant(a, form);
      const FittedConstant cb = fit_bound_constant(b, form);
      out.require(std::isfinite(ca.value) && ca.value > 0 && std::isfinite(cb.value) && cb.value > 0,
                  tag + " finite positive");
      out.require(ca.slack_min >= 0 && cb.slack_min >= 0, tag + " slack");
      const double drift = std::abs(cb.value - ca.value) / ca.value;
      out.require(drift <= 0.2, tag + " refinement");
      out.detail << (out.detail.tellp() > 0 ? "; " : "") << tag << " " << ca.value << " -> " << cb.value;
    }
  }
}

void weighted_distance(Outcome& out) {
  const Geometry g = two_pi_torus();
  const auto b = basis_of(g);
  const ScalarField u0 = eigenmode_data(*b, 1);
  const auto times = time_grid(1e-3, 0.05, 60);
  std::vector<double> scan_times = times;
  for (double t : time_grid(0.05, 0.2, 40)) scan_times.push_back(t);
  scan_times.erase(std::unique(scan_times.begin(), scan_times.end()), scan_times.end());
  const FrequencyEvaluator ev(frequency_config(g, b, u0, scan_times));
  const WeightedDistanceScan scan = weighted_distance_scan(ev, scan_times);
  double worst = 0.0;
  int failures = 0;
  for (const auto& r : scan.rows)
    if (r.t <= 0.05) {
      worst = std::max(worst, r.ratio);
      if (!r.pass && failures++ == 0) out.require(false, "factor 3/2 from t = " + std::to_string(r.t));
    }
  out.detail << "max ratio on (0, 0.05] = " << worst << " against 3/2, largest passing prefix t = "
             << scan.largest_passing_prefix_t;
}

void vanishing_order(Outcome& out) {
  const Geometry g = two_pi_torus();
  const auto b = basis_of(g);
  std::vector<double> times;
  for (int k = 1; k <= 100; ++k) times.push_back(0.01 * k);
  const double t0 = times[49];
  const Trace tr = frequency_trace(frequency_config(g, b, sampled(g, cos_x), times));
  const VanishingOrderReport rep = vanishing_order_bound(tr, t0, 1e-3);
  out.require(rep.pass, "pipeline bound");

  // Closed form for cos x: Z(t) ~ e^{2t}(1 + e^{-4t}), I(t) = t tanh 2t.
  const auto z = [](double t) { return std::exp(2 * t) * (1 + std::exp(-4 * t)); };
  const double c = std::exp(std::sqrt(t0)) * t0 * std::tanh(2 * t0);
  double worst = INFINITY;
  for (double t : times) {
    if (t > t0) break;
    const double ratio = z(t) / (z(t0) * std::pow(t / t0, 2 * c));
    worst = std::min(worst, ratio);
  }
  out.require(worst >= 1 - 1e-3, "closed-form bound");
  out.detail << "C(t0) = " << c << ", min Z(t) / (Z(t0)(t/t0)^{2C}) closed form " << worst << ", pipeline "
             << rep.worst_ratio;
}

struct Flows {
  std::shared_ptr<const ConformalBackground> bg;
  FlowTrajectory round, bumpy;
  double round_seconds = 0, bumpy_seconds = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Flows& flows() {
  static Flows f = [] {
    Flows out;
    out.bg = spectral_background(1.0, 16);
    const Geometry& g = out.bg->geometry();
    auto t0 = std::chrono::steady_clock::now();
    out.round = run_flow(init_flow(out.bg, sampled(g, [](const Vec3&) { return 0.0; })), 0.4, 1e-3);
    out.round_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    out.bumpy = run_flow(init_flow(out.bg, sampled(g, [](const Vec3& p) { return 0.05 * y20(p); })), 0.3, 1e-3);
    out.bumpy_seconds = seconds_since(t0);
    return out;
  }();
  return f;
}

void ricci_exactness(Outcome& out) {
  const Flows& f = flows();
  double worst = 0.0;
  for (const FlowState& s : f.round.states) {
    const ScalarField u = s.conformal_field();
    for (Eigen::Index i = 0; i < u.values.size(); ++i)
      worst = std::max(worst, std::abs(std::exp(2 * u.values[i]) - (1 - 2 * s.t)));
  }
  out.require(f.round.states.back().t == 0.4, "reached t = 0.4");
  out.require(worst < 1e-6, "homothety");
  out.require(f.round.max_gauss_bonnet_drift < 1e-3, "Gauss-Bonnet on the round flow");
  out.require(f.bumpy.max_gauss_bonnet_drift < 1e-3, "Gauss-Bonnet on the perturbed flow");
  out.require(f.round_seconds < 60, "runtime");
  out.detail << "max |e^{2u} - (1 - 2t)| = " << worst << ", Gauss-Bonnet drift " << f.round.max_gauss_bonnet_drift
             << " / " << f.bumpy.max_gauss_bonnet_drift << ", flow " << f.round_seconds << " s";
}

void j_monotonicity(Outcome& out) {
  const Flows& f = flows();
  const Geometry& g = f.bg->geometry();
  const auto z = [](const Vec3& p) { return p.z(); };
  const auto t0 = std::chrono::steady_clock::now();

  const JTrace round = j_trace(f.round, backward_heat_along_flow(f.round, sampled(g, z)), 1e-6, 1);
  double worst = 0.0;
  for (const auto& r : round.rows) {
    const double exact = 2 * r.t / (1 - 2 * r.t);
    worst = std::max(worst, r.t == 0 ? std::abs(r.J) : std::abs(r.J - exact) / exact);
  }
  out.require(worst < 1e-3, "round-sphere J");

  const JTrace bumpy = j_trace(f.bumpy, backward_heat_along_flow(f.bumpy, sampled(g, z)), 1e-6, 1);
  out.require(bumpy.j_verdict.at("pass").get<bool>(), "J nondecreasing");
  out.require(bumpy.t_lambda_verdict.at("pass").get<bool>(), "t lambda_R nondecreasing");
  const double secs = seconds_since(t0) + f.round_seconds + f.bumpy_seconds;
  out.require(secs < 180, "runtime");
  out.detail << "round J max relative error " << worst << ", perturbed J worst decrease "
             << bumpy.j_verdict.at("worst_relative_drop").get<double>() << ", t lambda_R worst decrease "
             << bumpy.t_lambda_verdict.at("worst_relative_drop").get<double>() << ", " << bumpy.rows.size() << " rows, " << secs
             << " s";
}

void surface_harnack(Outcome& out) {
  const Flows& f = flows();
  double worst = INFINITY;
  int checked = 0;
  for (const FlowState& s : f.bumpy.states) {
    const double k = std::round(s.t / 0.025);
    if (s.t < 0.05 - 1e-12 || std::abs(s.t - 0.025 * k) > 1e-9) continue;
    const FlowHarnackResult h = surface_flow_harnack(s.curvature_field(), s.conformal_field(), f.bg->geometry(), s.t,
                                                     1e-3 * s.max_curvature());
    out.require(h.verdict.pass, "t = " + std::to_string(s.t));
    worst = std::min(worst, h.verdict.min_eigenvalue / s.max_curvature());
    ++checked;
  }
  out.require(checked >= 10, "coverage of [0.05, 0.3]");
  out.detail << checked << " times, min eigenvalue / max R = " << worst;
}

void discretization(Outcome& out) {
  const Geometry mesh_g = Geometry::from_mesh(icosphere(4));
  const auto nodal = basis_of(mesh_g, 200);
  double worst_eig = 0.0;
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) {
      const double lam = nodal->eigenvalues[sh_index(l, m)];
      worst_eig = std::max(worst_eig, std::abs(lam - l * (l + 1.0)) / (l * (l + 1.0)));
    }
  out.require(worst_eig < 0.02, "eigenvalues");

  const Geometry g = Geometry::round_sphere(1.0, 4);
  const auto modal = basis_of(g);
  const auto fn = [](const Vec3& p) { return p.x() + 0.5 * p.y() * p.z() - 0.3 * p.z() * p.z(); };
  const auto times = time_grid(0.1, 1.0, 40);
  const Trace a = frequency_trace(frequency_config(g, modal, sampled(g, fn), times));
  const Trace m = frequency_trace(frequency_config(mesh_g, nodal, sampled(mesh_g, fn), times));
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    worst = std::max(worst, std::abs(m.rows[i].I - a.rows[i].I) / a.rows[i].I);
    worst = std::max(worst, std::abs(m.rows[i].N - a.rows[i].N) / a.rows[i].N);
  }
  out.require(worst < 0.01, "mesh vs analytic trace");
  out.detail << "eigenvalue error " << worst_eig << ", trace error " << worst;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    void (*check)(Outcome&);
    double limit;  // seconds, 0 if none
  };
  const std::vector<Criterion> criteria{
      {1, "Z' = 2D and closed-form I on the torus", derivative_identity, 10},
      {2, "N and I nondecreasing for seeded data on torus and sphere", frequency_monotonicity, 120},
      {3, "heat-kernel matrix Harnack on torus and sphere", matrix_harnack, 60},
      {4, "kernel bound constants finite, positive, refinement-stable", kernel_bounds, 0},
      {5, "weighted-distance inequality with factor 3/2 for t <= 0.05", weighted_distance, 0},
      {6, "vanishing-order bound at t0 = 0.5", vanishing_order, 0},
      {7, "round-sphere Ricci flow homothety and Gauss-Bonnet", ricci_exactness, 60},
      {8, "J and t lambda_R monotone, round-sphere J closed form", j_monotonicity, 180},
      {9, "surface matrix Harnack along the perturbed flow", surface_harnack, 0},
      {10, "icosphere spectrum and mesh frequency trace", discretization, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.check(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "[exception: " << e.what() << "]";
    }
    const double secs = seconds_since(start);
    if (c.limit > 0 && secs > c.limit) out.require(false, "runtime limit");
    failed += out.pass ? 0 : 1;
    std::printf("criterion %d: %s  %s (%s; %.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.title,
                out.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
