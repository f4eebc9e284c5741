#include <benchmark/benchmark.h>

#include "tractorlab/connection.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/tractor.hpp"

using namespace tractorlab;

namespace {

const ModelGeometry& sphere(int m) {
  static const ModelGeometry s7 = make_round_sphere(1, 2, 0);
  static const ModelGeometry s11 = make_round_sphere(2, 3, 0);
  return m == 1 ? s7 : s11;
}

void BM_MetricJets(benchmark::State& state) {
  const auto& model = sphere(static_cast<int>(state.range(0)));
  const Point x = model.chart.sample_points(1, 1)[0];
  for (auto _ : state) benchmark::DoNotOptimize(model.triple->g.evaluate(x, 3));
}
BENCHMARK(BM_MetricJets)->Arg(1)->Arg(2);

void BM_Curvature(benchmark::State& state) {
  const auto& model = sphere(static_cast<int>(state.range(0)));
  const Point x = model.chart.sample_points(1, 2)[0];
  for (auto _ : state) benchmark::DoNotOptimize(curvature_at(model.connection, x, 1));
}
BENCHMARK(BM_Curvature)->Arg(1)->Arg(2);

void BM_TractorTransport(benchmark::State& state) {
  const auto& model = sphere(1);
  Scale s(model.connection);
  const Point x = model.chart.sample_points(1, 3)[0];
  auto loop = rectangle_loop(x, 0, 1, 1e-2);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(transport_matrix(s, loop, steps));
}
BENCHMARK(BM_TractorTransport)->Arg(16)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
