#include <benchmark/benchmark.h>

#include <cmath>

#include "agepop/quadrature.hpp"
#include "agepop/sampler.hpp"

namespace {

using namespace agepop;

const Window kWindow = Window::unit_interval(40.0);
const RateModel kRates = RateModel::constant(1.0, 1.0);

void BM_SimulateBatchSerial(benchmark::State& state) {
  const State init = State::empty();
  for (auto _ : state) {
    auto batch = simulate_batch_serial(init, kRates, kWindow, 4.0, RngSpec{42}, 20000);
    benchmark::DoNotOptimize(batch);
  }
}
BENCHMARK(BM_SimulateBatchSerial)->Unit(benchmark::kMillisecond);

void BM_SimulateBatch(benchmark::State& state) {
  const State init = State::empty();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto batch = simulate_batch(init, kRates, kWindow, 4.0, RngSpec{42}, 20000, workers);
    benchmark::DoNotOptimize(batch);
  }
}
BENCHMARK(BM_SimulateBatch)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

double term(std::span<const std::size_t> idx) {
  double v = 1.0;
  for (std::size_t i : idx) v *= std::cos(0.01 * static_cast<double>(i));
  return v;
}

void BM_TensorSumSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tensor_sum_serial(120, 3, term));
}
BENCHMARK(BM_TensorSumSerial)->Unit(benchmark::kMillisecond);

void BM_TensorSum(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tensor_sum(120, 3, term, workers));
}
BENCHMARK(BM_TensorSum)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_IntegrateWindowSerial(benchmark::State& state) {
  QuadratureSpec spec;
  spec.x_nodes = 2048;
  const SpatialFunction f = [](const Position& x) { return std::exp(-x[0]) * std::sin(3.0 * x[0]); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate_window_serial(kWindow, spec, f));
}
BENCHMARK(BM_IntegrateWindowSerial);

void BM_IntegrateWindow(benchmark::State& state) {
  QuadratureSpec spec;
  spec.x_nodes = 2048;
  spec.workers = static_cast<int>(state.range(0));
  const SpatialFunction f = [](const Position& x) { return std::exp(-x[0]) * std::sin(3.0 * x[0]); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate_window(kWindow, spec, f));
}
BENCHMARK(BM_IntegrateWindow)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
