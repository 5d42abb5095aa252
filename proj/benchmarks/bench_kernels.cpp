// Microbenchmarks for the hot kernels: simplex projection, one projected
// gradient step, one proportional response step.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "fisher/market.hpp"
#include "fisher/objectives.hpp"
#include "fisher/projections.hpp"
#include "fisher/solvers.hpp"

namespace {

fisher::MarketInstance make_instance(int n, int m) {
  fisher::GenerationSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = 42;
  return fisher::generate_instance(spec);
}

void BM_SimplexProjection(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  fisher::Rng rng(7);
  Eigen::VectorXd y(d);
  for (int i = 0; i < d; ++i) y[i] = 2.0 * rng.uniform() - 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fisher::project_simplex(y, 1.0).point);
  }
}
BENCHMARK(BM_SimplexProjection)->Arg(50)->Arg(200)->Arg(1000);

void BM_PgStepLinear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fisher::MarketInstance inst = make_instance(n, 2 * n);
  const fisher::EquilibriumBounds bounds = fisher::equilibrium_bounds(inst);
  const fisher::FirstOrderProblem prob = fisher::make_linear_problem(inst, bounds);
  const double gamma = 1.0 / prob.lipschitz;
  Eigen::VectorXd x = prob.x0;
  for (auto _ : state) {
    const fisher::Eval e = prob.objective(x);
    benchmark::DoNotOptimize(x = prob.project(x - gamma * e.grad));
  }
}
BENCHMARK(BM_PgStepLinear)->Arg(50)->Arg(100)->Arg(200);

void BM_PrStepLinear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fisher::MarketInstance inst = make_instance(n, 2 * n);
  Eigen::MatrixXd b = fisher::linear_pr_initial(inst);
  for (auto _ : state) {
    benchmark::DoNotOptimize(b = fisher::pr_step_linear(b, inst));
  }
}
BENCHMARK(BM_PrStepLinear)->Arg(50)->Arg(100)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
