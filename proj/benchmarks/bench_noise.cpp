#include <benchmark/benchmark.h>

#include <vector>

#include "mvlevy/rng.hpp"
#include "mvlevy/stable_noise.hpp"

namespace {

void BM_PhiloxBlock(benchmark::State& state) {
  const mvlevy::RngStream rng(1, {0, 0, mvlevy::channel::slow});
  std::uint64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rng.block(step++, 0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxBlock);

void BM_StableDraw(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  const mvlevy::StableSampler sampler(alpha);
  const mvlevy::RngStream rng(2, {0, 0, mvlevy::channel::sampling});
  std::uint64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.from_block(rng.block(step++, 0)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StableDraw)->Arg(12)->Arg(15)->Arg(18);

void BM_ConvolutionIncrement(benchmark::State& state) {
  mvlevy::OperatorSpec spec;
  spec.n_modes = static_cast<std::size_t>(state.range(0));
  const mvlevy::StableSampler sampler(spec.alpha);
  const auto scales = mvlevy::convolution_scales(spec, 1.0 / 256.0, mvlevy::NoiseProcess::slow);
  const mvlevy::RngStream rng(3, {0, 0, mvlevy::channel::slow});
  std::vector<double> out(spec.n_modes);
  std::uint64_t step = 0;
  for (auto _ : state) {
    mvlevy::fill_increment(sampler, scales, rng, step++, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ConvolutionIncrement)->RangeMultiplier(2)->Range(4, 64);

}  // namespace
BENCHMARK_MAIN();
