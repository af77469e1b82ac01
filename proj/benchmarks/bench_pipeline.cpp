#include <benchmark/benchmark.h>

#include <random>

#include "copulacd/classical_copulas.hpp"
#include "copulacd/segmentation.hpp"
#include "copulacd/synthgen.hpp"

using namespace copulacd;

namespace {

void BM_CoSlic(benchmark::State& state) {
  SynthSpec spec;
  spec.width = spec.height = static_cast<int>(state.range(0));
  spec.seed = 4;
  const SynthScene scene = generate(spec);
  for (auto _ : state) benchmark::DoNotOptimize(co_slic(scene.pair, 600, 10.0, 0));
}
BENCHMARK(BM_CoSlic)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ClassicalCdf(benchmark::State& state) {
  const std::vector<CopulaFamily> fams = {CopulaFamily::gaussian(0.7), CopulaFamily::student_t(0.7, 4),
                                          CopulaFamily::clayton(2.0), CopulaFamily::frank(5.0)};
  const CopulaFamily& fam = fams[static_cast<std::size_t>(state.range(0))];
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  std::vector<double> pts(2048);
  for (auto& p : pts) p = unit(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cdf(fam, pts[i % pts.size()], pts[(i + 1) % pts.size()]));
    ++i;
  }
  state.SetLabel(to_string(fam.family));
}
BENCHMARK(BM_ClassicalCdf)->DenseRange(0, 3);

}  // namespace
