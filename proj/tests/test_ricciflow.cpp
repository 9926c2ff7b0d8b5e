#include "pfreq/error.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/ricciflow.hpp"
#include "pfreq/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sampled(const Geometry& g, std::function<double(const Vec3&)> fn) {
  ScalarField f;
  f.values.resize(static_cast<Eigen::Index>(g.sample_count()));
  for (std::size_t i = 0; i < g.sample_count(); ++i) f.values[static_cast<Eigen::Index>(i)] = fn(g.position(i));
  f.exact = std::move(fn);
  return f;
}

double y20(const Vec3& p) {
  const double z = p.z() / p.norm();
  return std::sqrt(5.0 / (16.0 * kPi)) * (3 * z * z - 1);
}

FlowState perturbed(const std::shared_ptr<const ConformalBackground>& bg, double delta) {
  return init_flow(bg, sampled(bg->geometry(), [delta](const Vec3& p) { return delta * y20(p); }));
}

}  // namespace

TEST_CASE("round sphere shrinks homothetically") {
  const auto bg = spectral_background(1.0, 16);
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3&) { return 0.0; }));
  CHECK(s0.min_curvature() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s0.max_curvature() == doctest::Approx(2.0).epsilon(1e-12));
  const FlowTrajectory traj = run_flow(s0, 0.4, 1e-3);
  CHECK(traj.steps.size() == 400);
  CHECK(traj.states.back().t == 0.4);
  for (const FlowState& s : traj.states) {
    const ScalarField u = s.conformal_field();
    const double spread = u.values.maxCoeff() - u.values.minCoeff();
    CHECK(spread < 1e-10);
    CHECK(std::abs(std::exp(2 * u.values[0]) - (1 - 2 * s.t)) < 1e-6);
    CHECK(s.cache_error() < 1e-10);
  }
  CHECK(traj.max_gauss_bonnet_drift < 1e-3);
  CHECK(traj.max_measure_residual() < 1e-6);
}

TEST_CASE("step_flow edge cases") {
  const auto bg = spectral_background(1.0, 8);
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3&) { return 0.0; }));
  const FlowState same = step_flow(s0, 0.0);
  CHECK(same.u == s0.u);
  CHECK(same.t == s0.t);

  try {
    step_flow(s0, 1.0);
    FAIL("expected a stability error");
  } catch (const FlowError& e) {
    CHECK(std::string(e.what()).find("step_flow") != std::string::npos);
    CHECK(std::string(e.what()).find("use dt <=") != std::string::npos);
  }
  CHECK(extinction_estimate(s0) == doctest::Approx(0.5).epsilon(1e-12));
  try {
    run_flow(s0, 0.499, 1e-3);
    FAIL("expected an extinction error");
  } catch (const FlowError& e) {
    CHECK(std::string(e.what()).find("step_flow") != std::string::npos);
  }
  // Stepping directly towards extinction fails before R blows up.
  FlowState s = s0;
  CHECK_THROWS_AS(
      [&] {
        while (true) s = step_flow(s, 2e-3);
      }(),
      FlowError);
  CHECK(s.t < 0.5);
}

TEST_CASE("initial data must be positively curved") {
  const auto bg = spectral_background(1.0, 12);
  const FlowState s = perturbed(bg, 0.05);
  CHECK(s.min_curvature() > 0);
  CHECK(std::abs(s.total_curvature() - 8 * kPi) < 1e-3 * 8 * kPi);
  try {
    perturbed(bg, 2.0);
    FAIL("expected a rejection");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("min R") != std::string::npos);
  }
}

TEST_CASE("backward heat recovers the first-mode amplitude") {
  const auto bg = spectral_background(1.0, 8);
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3&) { return 0.0; }));
  const FlowTrajectory traj = run_flow(s0, 0.4, 1e-3);
  const auto z = [](const Vec3& p) { return p.z(); };
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, sampled(bg->geometry(), z));
  const Eigen::VectorXd end = sol.values.back();
  for (std::size_t i = 0; i < sol.times.size(); i += 20) {
    const double t = sol.times[i];
    const double expected = (1 - 2 * 0.4) / (1 - 2 * t);
    CHECK(sol.values[i].norm() / end.norm() == doctest::Approx(expected).epsilon(1e-4));
  }
  CHECK_THROWS_AS(backward_heat_along_flow(traj, sampled(bg->geometry(), [](const Vec3&) { return 1.0; })),
                  ParameterError);
}

TEST_CASE("J and t lambda_R on the round sphere") {
  const auto bg = spectral_background(1.0, 8);
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3&) { return 0.0; }));
  const FlowTrajectory traj = run_flow(s0, 0.4, 1e-3);
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, sampled(bg->geometry(), [](const Vec3& p) { return p.x(); }));
  const JTrace jt = j_trace(traj, sol, 1e-6, 10);
  CHECK(jt.rows.front().J == 0.0);
  for (const auto& r : jt.rows) {
    const double exact = 2 * r.t / (1 - 2 * r.t);
    CHECK(std::abs(r.J - exact) <= 1e-3 * exact + 1e-15);
    CHECK(r.lambda_r == doctest::Approx(2 / (1 - 2 * r.t)).epsilon(1e-9));
  }
  CHECK(jt.j_verdict["pass"] == true);
  CHECK(jt.t_lambda_verdict["pass"] == true);
}

TEST_CASE("perturbed sphere: monotone J and t lambda_R, identities") {
  const auto bg = spectral_background(1.0, 12);
  const FlowTrajectory traj = run_flow(perturbed(bg, 0.05), 0.3, 1e-3);
  CHECK(traj.max_gauss_bonnet_drift < 1e-3);
  CHECK(traj.max_measure_residual() < 1e-2);
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, sampled(bg->geometry(), [](const Vec3& p) { return p.z(); }));
  const JTrace jt = j_trace(traj, sol, 1e-6, 1);
  CHECK(jt.j_verdict["pass"] == true);
  CHECK(jt.t_lambda_verdict["pass"] == true);
  CHECK(jt.den_identity_error < 1e-3);

  const FlowState& s = traj.states[100];
  CHECK(lambda_R(s, 7.5) == doctest::Approx(lambda_R(s)).epsilon(1e-12));
  CHECK(lambda_R(s) > 0);

  const FlowHarnackResult h = surface_flow_harnack(s.curvature_field(), s.conformal_field(), bg->geometry(), s.t,
                                                   1e-3 * s.max_curvature());
  CHECK(h.verdict.pass);
}

TEST_CASE("frozen metric reduces to the spectral heat solve") {
  const auto bg = spectral_background(1.0, 6);
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3&) { return 0.0; }));
  FlowTrajectory traj;
  for (int i = 0; i <= 1000; ++i) {
    FlowState s = s0;
    s.t = 1e-4 * i;
    traj.states.push_back(s);
  }
  const Geometry& g = bg->geometry();
  const auto f = [](const Vec3& p) { return p.x() * p.y() + 0.3 * p.z(); };
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, sampled(g, f));
  const OperatorPair ops = operators(g);
  const SpectralBasis basis = eigenbasis(g, ops, 49);
  const ScalarField expect = solve_heat(basis, sampled(g, f), 0.1);
  const ScalarField got = bg->sample(sol.values.front());
  CHECK((got.values - expect.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("checkpoints keep the flow time and state") {
  const auto bg = spectral_background(1.0, 8);
  const FlowTrajectory traj = run_flow(perturbed(bg, 0.05), 0.05, 1e-3);
  const auto path = (std::filesystem::temp_directory_path() / "pfreq_ckpt_test.json").string();
  save_checkpoint(traj.states.back(), path, traj.summary());
  const FlowState back = load_checkpoint(bg, path);
  CHECK(back.t == traj.states.back().t);
  CHECK(back.u == traj.states.back().u);
  CHECK(back.cache_error() == 0.0);
  CHECK_THROWS_AS(load_checkpoint(spectral_background(1.0, 6), path), ParameterError);
  std::filesystem::remove(path);
}

TEST_CASE("mesh background conserves total curvature") {
  const auto bg = mesh_background(Geometry::from_mesh(icosphere(2)));
  const FlowState s0 = init_flow(bg, sampled(bg->geometry(), [](const Vec3& p) { return 0.05 * y20(p); }));
  CHECK(std::abs(s0.total_curvature() - 8 * kPi) < 1e-10);
  const double dt = 0.5 * max_stable_step(s0);
  const FlowTrajectory traj = run_flow(s0, 0.1, dt);
  CHECK(traj.max_gauss_bonnet_drift < 1e-10);
  const FlowState& s = traj.states.back();
  CHECK(s.area() == doctest::Approx(s0.area() - 8 * kPi * 0.1).epsilon(1e-8));
  CHECK(lambda_R(s) > 0);
  CHECK_THROWS_AS(mesh_background(Geometry::flat_torus(1, 1, 8, 8)), ParameterError);
}
