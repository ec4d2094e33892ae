#include <coulomb_ot/duality.hpp>
#include <coulomb_ot/solver.hpp>

#include <benchmark/benchmark.h>

#include <memory>

using namespace coulomb_ot;

namespace {

std::shared_ptr<const DiscreteMeasure> uniform(int n) {
  return std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), n));
}

void BM_SolveLp1d(benchmark::State& state) {
  auto mu = uniform(static_cast<int>(state.range(0)));
  const auto c = CostModel::coulomb(1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(mu, mu, c).first.cost_value);
}
BENCHMARK(BM_SolveLp1d)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SolveLp2d(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto mu = std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::gaussian(2, 1.0, 3.0), k));
  const auto c = CostModel::coulomb(2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(mu, mu, c).first.cost_value);
}
BENCHMARK(BM_SolveLp2d)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Entropic1d(benchmark::State& state) {
  auto mu = uniform(static_cast<int>(state.range(0)));
  const auto c = CostModel::coulomb(1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_entropic(mu, mu, c, 50.0, 1e-9).first.cost_value);
}
BENCHMARK(BM_Entropic1d)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Potentials(benchmark::State& state) {
  auto mu = uniform(static_cast<int>(state.range(0)));
  const auto c = CostModel::modified(1, 0.05);
  const auto plan = solve_lp(mu, mu, c).first;
  for (auto _ : state) benchmark::DoNotOptimize(ruschendorf_potentials(plan, c).psi.sum());
}
BENCHMARK(BM_Potentials)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
