#include <benchmark/benchmark.h>

#include <array>
#include <memory>
#include <numbers>
#include <string>

#include "conjscope/analysis.hpp"
#include "conjscope/catalog.hpp"
#include "conjscope/expr.hpp"
#include "conjscope/frames.hpp"
#include "conjscope/jacobi.hpp"
#include "conjscope/pair.hpp"

using namespace conjscope;

namespace {

const std::array<double, 4> kPoint{0.3, -0.2, 0.5, 0.4};

void BM_ExprEval(benchmark::State& state) {
  const ExprProgram p(Expr::parse("y2/(y1 - x2)*(sin(x1) - 2*y2) + x1^2*cos(y1)"), {"x1", "x2", "y1", "y2"});
  for (auto _ : state) benchmark::DoNotOptimize(p.eval(std::span<const double>(kPoint)));
}
BENCHMARK(BM_ExprEval);

void BM_ExprEvalHyperDual(benchmark::State& state) {
  const ExprProgram p(Expr::parse("y2/(y1 - x2)*(sin(x1) - 2*y2) + x1^2*cos(y1)"), {"x1", "x2", "y1", "y2"});
  std::array<HyperDual, 4> v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = HyperDual(kPoint[i]);
  v[0].e1 = 1.0;
  v[2].e2 = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(p.eval(std::span<const HyperDual>(v)));
}
BENCHMARK(BM_ExprEvalHyperDual);

void BM_CurvatureAt(benchmark::State& state) {
  const BuiltSystem b = build("dancing", {{"F", "sin(x1)"}});
  const DynamicPair pair(b.model);
  for (auto _ : state) benchmark::DoNotOptimize(curvature_at(pair, b.default_x0));
}
BENCHMARK(BM_CurvatureAt);

void BM_NormalFrameJacobi(benchmark::State& state) {
  const BuiltSystem b = build("perturbed_pair", {{"eps", "0.05"}});
  const auto pair = std::make_shared<const DynamicPair>(b.model);
  for (auto _ : state) {
    const FrameTransport ft = transport_normal_frame(pair, b.default_x0, 3 * std::numbers::pi);
    const JacobiSolution js = integrate_jacobi([&ft](double t) { return ft.K_normal(t); }, 2, 3 * std::numbers::pi);
    benchmark::DoNotOptimize(find_conjugate_times(js));
  }
}
BENCHMARK(BM_NormalFrameJacobi)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
  static const std::array<std::string, 4> names{"harmonic", "perturbed_pair", "dancing", "sphere_spray"};
  const BuiltSystem b = build(names[static_cast<std::size_t>(state.range(0))]);
  const SystemSpec spec = from_catalog(b);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(spec, b.default_x0, b.default_T));
  state.SetLabel(b.name);
}
BENCHMARK(BM_Analyze)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
