#include <benchmark/benchmark.h>

#include "rlab/catalog.hpp"
#include "rlab/flow.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/tensor.hpp"
#include "rlab/verifier.hpp"

using namespace rlab;

namespace {

Vector point3() {
  Vector p(3);
  p << 0.3, -0.2, 0.5;
  return p;
}

}  // namespace

static void BM_MetricJetSphere3(benchmark::State& state) {
  const GeometrySpec s = round_sphere(3);
  const Vector p = point3();
  for (auto _ : state) benchmark::DoNotOptimize(s.metric.jet(p, 2));
}
BENCHMARK(BM_MetricJetSphere3);

static void BM_RicciSphere3(benchmark::State& state) {
  const GeometrySpec s = round_sphere(3);
  const Vector p = point3();
  for (auto _ : state) benchmark::DoNotOptimize(ricci(s.metric, p));
}
BENCHMARK(BM_RicciSphere3);

static void BM_RicciBerger(benchmark::State& state) {
  const GeometrySpec b = berger_sphere(9.0, 2.0);
  Vector p(3);
  p << 0.7, 1.0, 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(ricci(b.metric, p));
}
BENCHMARK(BM_RicciBerger);

static void BM_ScalarCurvatureDifferential(benchmark::State& state) {
  const GeometrySpec s = round_sphere(3);
  const Vector p = point3();
  for (auto _ : state) benchmark::DoNotOptimize(scalar_curvature_differential(s.metric, p));
}
BENCHMARK(BM_ScalarCurvatureDifferential);

static void BM_ObataIntegralS3(benchmark::State& state) {
  const SolitonData d = obata_sphere(3, 1.0, 0.0, 0.0, {0, 0, 0, 1}, {0, 0, 0, 1});
  const QuadratureRule q = sphere_rule(3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integral_identity_check(d, q));
}
BENCHMARK(BM_ObataIntegralS3)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
static void BM_ReducedFlowRhs(benchmark::State& state) {
  const rlab::SelfSimilarOracle o(rlab::warped_soliton(2, -2.0, {1.0}, {1.0}));
  const rlab::ReducedProblem p = rlab::reduced_problem(o);
  const rlab::FlowState s = rlab::oracle_state(o, rlab::FlowGrid{static_cast<int>(state.range(0)), 2.0}, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(rlab::reduced_rhs(p, s));
}
BENCHMARK(BM_ReducedFlowRhs)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
