#include <benchmark/benchmark.h>

#include <random>

#include "copulacd/copula_losses.hpp"
#include "copulacd/neural_copula.hpp"

using namespace copulacd;

namespace {

TrainingSet pairs(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::uint8_t> g1, g2;
  for (int i = 0; i < n; ++i) {
    const double a = nd(rng);
    const double b = 0.7 * a + 0.71 * nd(rng);
    g1.push_back(static_cast<std::uint8_t>(std::clamp(120 + 30 * a, 0.0, 255.0)));
    g2.push_back(static_cast<std::uint8_t>(std::clamp(100 + 25 * b, 0.0, 255.0)));
  }
  return make_training_set(std::move(g1), std::move(g2));
}

void BM_ForwardWithDerivs(benchmark::State& state) {
  const CopulaNet net = init_net(default_layer_sizes(), 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> us(n), vs(n);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit;
  for (std::size_t i = 0; i < n; ++i) {
    us[i] = unit(rng);
    vs[i] = unit(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(forward_with_derivs(net, us, vs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardWithDerivs)->Arg(512)->Arg(65536);

// One training epoch: loss value plus parameter gradient.
void BM_LossEpoch(benchmark::State& state) {
  const TrainingSet data = pairs(600);
  LossSettings s;
  s.n4 = s.n5 = static_cast<int>(state.range(0));
  const LossEngine engine(s, data);
  const CopulaNet net = init_net(default_layer_sizes(), 3);
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(engine.evaluate(net, grad));
}
BENCHMARK(BM_LossEpoch)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
