#include "pfreq/error.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sampled(const Geometry& g, std::function<double(const Vec3&)> fn, bool keep_exact = true) {
  ScalarField f;
  f.values.resize(static_cast<Eigen::Index>(g.sample_count()));
  for (std::size_t i = 0; i < g.sample_count(); ++i) f.values[static_cast<Eigen::Index>(i)] = fn(g.position(i));
  if (keep_exact) f.exact = std::move(fn);
  return f;
}

double frob(const Eigen::Matrix2d& a) { return a.norm(); }

}  // namespace

TEST_CASE("log-linear and constant fields have zero Hessian") {
  const Geometry g = Geometry::flat_torus(2 * kPi, 2 * kPi, 32, 32);
  const ScalarField f = sampled(g, [](const Vec3& p) { return std::exp(0.7 * p.x() - 0.3 * p.y()); });
  const TensorField h = hessian_log(f, g);
  CHECK(h.method == "normal-coordinate-fd");
  const double step = 1e-3;
  for (std::size_t i = 0; i < g.sample_count(); ++i) {
    const Vec3& p = g.position(i);
    // The exponential is not periodic; skip the seam.
    if (p.x() < 2 * step || p.y() < 2 * step) continue;
    CHECK(frob(h.tensors[i]) < 1e-6);
  }
  const ScalarField c = sampled(g, [](const Vec3&) { return 3.0; });
  for (const auto& t : hessian_log(c, g).tensors) CHECK(frob(t) == 0.0);
  ScalarField grid_only = c;
  grid_only.exact = nullptr;
  const TensorField hg = hessian_log(grid_only, g);
  CHECK(hg.method == "grid-fd");
  for (const auto& t : hg.tensors) CHECK(frob(t) == 0.0);

  ScalarField bad = c;
  bad.values[3] = -1.0;
  CHECK_THROWS_AS(hessian_log(bad, g), DomainError);
}

TEST_CASE("torus kernel Hessian at the source is the Gaussian value") {
  const Geometry g = Geometry::flat_torus(2 * kPi, 2 * kPi, 64, 64);
  const double t = 0.01;
  const HeatKernelField h = heat_kernel(g, nullptr, 0, t);
  const TensorField hl = hessian_log(h.field, g);
  const Eigen::Matrix2d expected = -Eigen::Matrix2d::Identity() / (2 * t);
  CHECK(frob(hl.tensors[0] - expected) < 0.01 * frob(expected));
  const TensorField ht = harnack_tensor(h, g);
  CHECK(frob(ht.tensors[0]) < 0.01 / (2 * t));
}

TEST_CASE("heat kernel Harnack tensor on the flat torus and round sphere") {
  const Geometry torus = Geometry::flat_torus(2 * kPi, 2 * kPi, 48, 48);
  for (double t : {0.05, 0.2, 1.0}) {
    const TensorField ht = harnack_tensor(heat_kernel(torus, nullptr, 0, t), torus);
    const PositivityVerdict v = check_positivity(ht, Eigen::VectorXd(), 1e-4 / (2 * t));
    CHECK(v.pass);
  }
  const Geometry sphere = Geometry::round_sphere(1.0, 3);
  const double t = 0.2;
  const TensorField hs = harnack_tensor(heat_kernel(sphere, nullptr, 0, t), sphere);
  CHECK(check_positivity(hs, Eigen::VectorXd(), 1e-3 / (2 * t)).pass);
}

TEST_CASE("check_positivity arithmetic") {
  TensorField z;
  z.tensors.assign(3, Eigen::Matrix2d::Zero());
  CHECK(check_positivity(z, Eigen::VectorXd::Zero(3), 0.0).pass);

  TensorField d;
  Eigen::Matrix2d m;
  m << -1, 0, 0, 0;
  d.tensors = {m};
  const PositivityVerdict v = check_positivity(d, Eigen::VectorXd::Constant(1, 0.5), 0.0);
  CHECK_FALSE(v.pass);
  CHECK(v.min_eigenvalue == doctest::Approx(-0.5));
  CHECK(v.argmin == 0);
  CHECK(v.violations == 1);
  CHECK_THROWS_AS(check_positivity(d, Eigen::VectorXd::Constant(1, -0.5), 0.0), ParameterError);
  const auto j = v.to_json();
  CHECK(j.at("pass") == false);
}

TEST_CASE("minimum eigenvalue is frame invariant") {
  const Geometry g = Geometry::round_sphere(1.0, 2);
  const HeatKernelField h = heat_kernel(g, nullptr, 3, 0.15);
  const TensorField base = harnack_tensor(h, g);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  HessianOptions opt;
  for (std::size_t i = 0; i < g.sample_count(); ++i) opt.frame_angles.push_back(ang(rng));
  const TensorField rot = harnack_tensor(h, g, opt);
  CHECK((base.min_eigenvalues() - rot.min_eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  // Tensor transforms by conjugation with the frame rotation.
  const double c = std::cos(opt.frame_angles[5]), s = std::sin(opt.frame_angles[5]);
  Eigen::Matrix2d q;
  q << c, -s, s, c;
  CHECK(frob(rot.tensors[5] - q.transpose() * base.tensors[5] * q) < 1e-12);
  CHECK(rot.frames[5].first.dot(c * base.frames[5].first + s * base.frames[5].second) == doctest::Approx(1.0));
}

TEST_CASE("two-ring Hessian on the icosphere matches the analytic Hessian") {
  const Geometry analytic = Geometry::round_sphere(1.0, 4);
  const Geometry mesh = Geometry::from_mesh(icosphere(4));
  // f = exp(Y_1) with Y_1 proportional to z; Hess(z) = -z g on the unit sphere.
  const double a = std::sqrt(3.0 / (4 * kPi));
  auto fn = [a](const Vec3& p) { return std::exp(a * p.normalized().z()); };
  const TensorField hm = hessian_log(sampled(mesh, fn, false), mesh);
  const TensorField ha = hessian_log(sampled(analytic, fn), analytic);
  CHECK(hm.method == "two-ring-fit");
  CHECK(hm.unreliable_count() == 0);
  double err = 0.0, ref = 0.0, exact_err = 0.0;
  for (std::size_t i = 0; i < mesh.sample_count(); ++i) {
    const double z = mesh.position(i).z();
    if (std::abs(z) > 0.9) continue;
    // Both use the same default frames at the same points.
    err += (hm.tensors[i] - ha.tensors[i]).squaredNorm();
    ref += ha.tensors[i].squaredNorm();
    exact_err += (ha.tensors[i] + a * z * Eigen::Matrix2d::Identity()).squaredNorm();
  }
  CHECK(std::sqrt(err / ref) < 0.05);
  CHECK(std::sqrt(exact_err / ref) < 1e-5);
}

TEST_CASE("kernel bound fits") {
  const Geometry g = Geometry::flat_torus(2 * kPi, 2 * kPi, 32, 32);
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.05 * std::pow(20.0, k / 10.0));
  const KernelSamples s = sample_kernels(g, nullptr, 0, times, true);
  for (auto form : {BoundForm::UpperKernel, BoundForm::LowerKernel, BoundForm::Gradient}) {
    const FittedConstant c = fit_bound_constant(s, form);
    CHECK(std::isfinite(c.value));
    CHECK(c.value > 0.0);
    CHECK(c.slack_min == 0.0);
    CHECK(c.slack_max >= 0.0);
  }
  const FittedConstant b = fit_bound_constant(s, BoundForm::Gradient);
  const FittedConstant c0 = fit_bound_constant(s, BoundForm::BOfA, b.value);
  CHECK(std::isfinite(c0.value));

  // Kernel Harnack with the fitted C0 as deficit at eps = 0.5.
  for (std::size_t k = 0; k < times.size(); k += 5) {
    const HeatKernelField h = heat_kernel(g, nullptr, 0, times[k]);
    const TensorField ht = harnack_tensor(h, g);
    const Eigen::VectorXd deficit = kernel_harnack_deficit(s.distance, times[k], 0.5, std::max(0.0, c0.value));
    CHECK(check_positivity(ht, deficit, 0.0).pass);
  }
}

TEST_CASE("upper fit of a constant field is algebraic") {
  KernelSamples s;
  s.times = {0.1, 0.4, 1.0};
  s.distance = Eigen::VectorXd::LinSpaced(5, 0.0, 2.0);
  const double area = 7.0;
  for (std::size_t k = 0; k < 3; ++k) s.values.push_back(Eigen::VectorXd::Constant(5, 1.0 / area));
  const FittedConstant c = fit_bound_constant(s, BoundForm::UpperKernel);
  double expected = 0.0;
  for (double t : s.times) {
    for (Eigen::Index i = 0; i < 5; ++i) expected = std::max(expected, t * std::exp(s.distance[i] * s.distance[i] / (5 * t)));
  }
  CHECK(c.value == doctest::Approx(expected / area).epsilon(1e-13));

  s.values[1][2] = 0.0;
  CHECK_THROWS_AS(fit_bound_constant(s, BoundForm::LowerKernel), DomainError);
  s.values.pop_back();
  CHECK_THROWS_AS(fit_bound_constant(s, BoundForm::UpperKernel), ParameterError);
}

TEST_CASE("fits are monotone under grid enlargement") {
  const Geometry g = Geometry::round_sphere(1.0, 2);
  const KernelSamples small = sample_kernels(g, nullptr, 0, {0.2, 0.5}, false);
  const KernelSamples large = sample_kernels(g, nullptr, 0, {0.1, 0.2, 0.5, 1.0}, false);
  CHECK(fit_bound_constant(large, BoundForm::UpperKernel).value >= fit_bound_constant(small, BoundForm::UpperKernel).value);
  CHECK(fit_bound_constant(large, BoundForm::LowerKernel).value <= fit_bound_constant(small, BoundForm::LowerKernel).value);
}

TEST_CASE("general deficit arithmetic") {
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(2, 0.5);
  const Eigen::VectorXd d = general_harnack_deficit(f, 0.25, 0.1, 0.0, 2.0, 2);
  // K = 0: eps * (2 + log(2 / (0.25 * 0.5))).
  CHECK(d[0] == doctest::Approx(0.1 * (2 + std::log(16.0))));
  const Eigen::VectorXd dk = general_harnack_deficit(f, 0.25, 0.1, 1.0, 2.0, 2);
  CHECK(dk[1] == doctest::Approx((34.0 / 3.0 + 0.1 + 0.1) * (2 + std::log(16.0))));
}

TEST_CASE("surface Harnack tensor on a round metric") {
  const Geometry g = Geometry::round_sphere(1.0, 2);
  const ScalarField r = sampled(g, [](const Vec3&) { return 2.0; });
  const ScalarField u = sampled(g, [](const Vec3&) { return 0.0; });
  const FlowHarnackResult res = surface_flow_harnack(r, u, g, 0.1, 0.0);
  CHECK(res.verdict.pass);
  for (const auto& t : res.tensor.tensors) CHECK(frob(t - 0.5 * (2.0 + 10.0) * Eigen::Matrix2d::Identity()) < 1e-12);
  ScalarField flipped = r;
  flipped.values[4] = -2.0;
  CHECK_THROWS_AS(surface_flow_harnack(flipped, u, g, 0.1, 0.0), DomainError);
  CHECK_THROWS_AS(surface_flow_harnack(r, u, g, 0.0, 0.0), DomainError);
}
