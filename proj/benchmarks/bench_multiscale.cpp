#include <benchmark/benchmark.h>

#include "mvlevy/coefficients.hpp"
#include "mvlevy/multiscale.hpp"

namespace {

// One macro step's worth of slow-fast work per particle, scaled by M.
void BM_SlowFast(benchmark::State& state) {
  mvlevy::MultiscaleConfig c;
  c.base.spec.n_modes = 8;
  c.base.coeffs = mvlevy::make_builtin(mvlevy::BuiltinFamily{}, 8, 1.0);
  c.base.T = 0.5;
  c.base.h = 1.0 / 64.0;
  c.base.M = static_cast<std::size_t>(state.range(0));
  c.epsilon = 1.0 / 64.0;
  c.h_fast = c.epsilon / 16.0;
  mvlevy::SlowFastOptions opts;
  opts.record_fast = false;
  for (auto _ : state) benchmark::DoNotOptimize(mvlevy::simulate_slow_fast(c, opts).slow.times());
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(c.base.steps() * c.substeps()));
}
BENCHMARK(BM_SlowFast)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
