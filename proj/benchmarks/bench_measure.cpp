#include <benchmark/benchmark.h>

#include <vector>

#include "mvlevy/assignment.hpp"
#include "mvlevy/measure.hpp"
#include "mvlevy/rng.hpp"

namespace {

mvlevy::EmpiricalMeasure cloud(std::size_t m, std::size_t n, std::uint64_t seed) {
  mvlevy::EmpiricalMeasure mu(m, n);
  mvlevy::RngStream rng(seed, {0, 0, mvlevy::channel::sampling});
  for (double& v : mu.data()) v = rng.uniform();
  return mu;
}

void BM_Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mvlevy::RngStream rng(5, {0, 0, mvlevy::channel::sampling});
  std::vector<double> cost(n * n);
  for (double& c : cost) c = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(mvlevy::solve_assignment(cost, n).total_cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assignment)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNCubed);

void BM_WassersteinExact(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(m, 8, 6), b = cloud(m, 8, 7);
  for (auto _ : state) benchmark::DoNotOptimize(mvlevy::wasserstein_exact(a, b, 1.0));
}
BENCHMARK(BM_WassersteinExact)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
