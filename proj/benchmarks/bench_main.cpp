#include "jflow/cohomology.hpp"
#include "jflow/flow.hpp"
#include "jflow/ma.hpp"
#include "jflow/presets.hpp"
#include "jflow/spectral.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace jflow;

namespace {

ScalarField wave(const Grid& g) {
  return ScalarField::sample(g, [](const auto& x) { return 0.01 * std::cos(2 * std::numbers::pi * (x[0] + x[1])); });
}

void BM_ComplexHessian(benchmark::State& state) {
  const Grid g = Grid::torus(static_cast<int>(state.range(0)));
  const auto phi = wave(g);
  auto& sp = spectral_for(g);
  for (auto _ : state) benchmark::DoNotOptimize(sp.complex_hessian(phi));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_ComplexHessian)->Arg(8)->Arg(16)->Arg(24);

void BM_FullFlowStep(benchmark::State& state) {
  const Grid g = Grid::torus(static_cast<int>(state.range(0)));
  const auto p = preset("smooth_split");
  const FullProblem problem(p.chi0.realize(g), p.omega0.realize(g));
  const FlowState start = initial_state(problem, std::vector<double>(g.size(), 0.0));
  const double dt = adaptive_dt(problem, start, 0.2);
  for (auto _ : state) {
    FlowState s = start;
    benchmark::DoNotOptimize(step(problem, s, dt));
  }
}
BENCHMARK(BM_FullFlowStep)->Arg(8)->Arg(16);

void BM_SplitFlow(benchmark::State& state) {
  const Grid pl = Grid::plane(static_cast<int>(state.range(0)));
  const auto p = preset("smooth_split");
  const auto chi0 = p.chi0.realize_split(pl), w = p.omega0.realize_split(pl), wh = p.omega_hat.realize_split(pl);
  FlowConfig cfg;
  cfg.max_time = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(evolve(cfg, chi0, w, wh, SplitField::zero(pl)));
}
BENCHMARK(BM_SplitFlow)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MASolve4D(benchmark::State& state) {
  const Grid g = Grid::torus(static_cast<int>(state.range(0)));
  const auto p = preset("smooth_split");
  const auto chi0 = p.chi0.realize(g), w = p.omega0.realize(g);
  const double c = c_constant(chi0.cls(), w.cls());
  const auto alpha = build_alpha(chi0, w, c);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ma(alpha, c, w, MASolverConfig{}));
}
BENCHMARK(BM_MASolve4D)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
