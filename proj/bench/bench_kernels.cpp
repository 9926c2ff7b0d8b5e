// Serial reference against the OpenMP kernels. The second benchmark argument
// selects the path: 0 serial, 1 parallel.

#include "pfreq/frequency.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/initial_data.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/ricciflow.hpp"
#include "pfreq/spectral.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <numbers>

using namespace pfreq;

namespace {

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::Parallel : Execution::Serial; }

const Geometry& torus(int n) {
  static std::map<int, Geometry> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const double p = 2 * std::numbers::pi;
    it = cache.emplace(n, Geometry::flat_torus(p, p, n, n)).first;
  }
  return it->second;
}

void BM_TorusHeatKernel(benchmark::State& state) {
  const Geometry& g = torus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(heat_kernel(g, nullptr, 0, 0.1, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.sample_count()));
}
BENCHMARK(BM_TorusHeatKernel)->ArgsProduct({{64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_HarnackTensor(benchmark::State& state) {
  const Geometry g = Geometry::round_sphere(1.0, static_cast<int>(state.range(0)));
  const HeatKernelField h = heat_kernel(g, nullptr, 0, 0.2);
  HessianOptions opt;
  opt.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(harnack_tensor(h, g, opt));
}
BENCHMARK(BM_HarnackTensor)->ArgsProduct({{3, 4}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_FrequencyTrace(benchmark::State& state) {
  const Geometry g = Geometry::round_sphere(1.0, 3);
  auto basis = std::make_shared<const SpectralBasis>(eigenbasis(g, operators(g), 256));
  FrequencyConfig c;
  c.geometry = g;
  c.basis = basis;
  c.u0 = random_bandlimited_data(*basis, 1, static_cast<int>(state.range(0)));
  c.times = time_grid(0.01, 1.0, 64);
  c.horizon = 1.0;
  const FrequencyEvaluator ev(c, mode(state));
  for (auto _ : state) benchmark::DoNotOptimize(frequency_trace(ev, mode(state)));
}
BENCHMARK(BM_FrequencyTrace)->ArgsProduct({{2, 4}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_JTrace(benchmark::State& state) {
  const auto bg = spectral_background(1.0, static_cast<int>(state.range(0)));
  const Geometry& g = bg->geometry();
  ScalarField u0;
  u0.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.sample_count()));
  u0.exact = [](const Vec3&) { return 0.0; };
  const FlowTrajectory traj = run_flow(init_flow(bg, u0), 0.02, 1e-3);
  ScalarField v;
  v.values.resize(static_cast<Eigen::Index>(g.sample_count()));
  for (std::size_t i = 0; i < g.sample_count(); ++i) v.values[static_cast<Eigen::Index>(i)] = g.position(i).z();
  v.exact = [](const Vec3& p) { return p.z(); };
  const BackwardHeatSolution sol = backward_heat_along_flow(traj, v);
  for (auto _ : state) benchmark::DoNotOptimize(j_trace(traj, sol, 1e-6, 1, mode(state)));
}
BENCHMARK(BM_JTrace)->ArgsProduct({{8, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
