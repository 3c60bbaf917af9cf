#include <benchmark/benchmark.h>

#include <memory>

#include "nodal/ansatz.hpp"
#include "nodal/model.hpp"
#include "nodal/quadrature.hpp"
#include "nodal/radial_ode.hpp"

namespace {

const nodal::Nonlinearity& family() {
  static const nodal::Nonlinearity nl = nodal::Nonlinearity::family(nodal::make_params(5, 3, 4));
  return nl;
}

std::shared_ptr<const nodal::RadialProfile> ground_state() {
  static const auto prof = std::make_shared<const nodal::RadialProfile>(nodal::shoot_ground_state(family()).profile);
  return prof;
}

void BM_NonlinearityF(benchmark::State& state) {
  const auto& nl = family();
  double s = 0.0;
  for (auto _ : state) {
    s += 1e-3;
    if (s > 20.0) s = 1e-3;
    benchmark::DoNotOptimize(nl.F(s));
  }
}
BENCHMARK(BM_NonlinearityF);

void BM_ProfileValue(benchmark::State& state) {
  const auto prof = ground_state();
  double r = 0.0;
  for (auto _ : state) {
    r += 0.37;
    if (r > 2000.0) r = 0.0;
    benchmark::DoNotOptimize(prof->value(r));
  }
}
BENCHMARK(BM_ProfileValue);

void BM_ShootGroundState(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(nodal::shoot_ground_state(family()));
}
BENCHMARK(BM_ShootGroundState)->Unit(benchmark::kMillisecond);

void BM_InteractionIntegral(benchmark::State& state) {
  const auto prof = ground_state();
  const double s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nodal::interaction_integral(*prof, family(), s));
}
BENCHMARK(BM_InteractionIntegral)->Arg(10)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_ThreeCenter(benchmark::State& state) {
  const nodal::RadialTerm g{[](double r) { return 1.0 / ((1.0 + r) * (1.0 + r) * (1.0 + r)); }, -3.0};
  std::array<nodal::Point, 3> c = {nodal::Point{0, 0, 0, 0, 0}, nodal::Point{20, 0, 0, 0, 0},
                                   nodal::Point{10, 17, 0, 0, 0}};
  nodal::QuadratureOptions o;
  o.rel_tol = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(nodal::three_center_integral({g, g, g}, c, 5, o));
}
BENCHMARK(BM_ThreeCenter)->Unit(benchmark::kMillisecond);

void BM_MonteCarloField(benchmark::State& state) {
  const auto prof = ground_state();
  const nodal::AnsatzState st(prof, nodal::orbit_points(6, 5), 20.0);
  nodal::McOptions o;
  o.n_samples = static_cast<std::size_t>(state.range(0));
  o.scale = prof->scale();
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodal::mc_full_integral(
        [&](std::span<const double> x) { return family().F(st.sigma_hat(x)); }, st.centers(), 20.0, o));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloField)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
