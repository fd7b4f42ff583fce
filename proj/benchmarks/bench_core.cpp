#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "robustnav/basis.hpp"
#include "robustnav/counterpart.hpp"
#include "robustnav/lp.hpp"
#include "robustnav/picnn.hpp"
#include "robustnav/planner.hpp"
#include "robustnav/sampler.hpp"
#include "robustnav/suite.hpp"

using namespace robustnav;

namespace {

GridSpec grid(int edge, int tau) {
  GridSpec g;
  g.edge = edge;
  g.horizon = tau;
  return g;
}

// Random bounded LP with a feasible interior point.
lp::Problem random_lp(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  lp::Problem p(n, m, 0);
  for (int j = 0; j < n; ++j) {
    p.var_lower[j] = -1.0;
    p.var_upper[j] = 1.0;
    p.cost[j] = rng.normal();
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.ineq_matrix(i, j) = rng.normal();
    p.ineq_rhs[i] = rng.uniform(0.1, 1.0);
  }
  return p;
}

void BM_LpSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = random_lp(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve(p).objective);
}
BENCHMARK(BM_LpSolve)->Arg(10)->Arg(50)->Arg(100);

void BM_PicnnForward(benchmark::State& state) {
  const int V = static_cast<int>(state.range(0));
  const auto params = picnn::random_params(2, 16, V + kFeatureDim, V, 3);
  Rng rng(4);
  Vector x(V + kFeatureDim), m(V);
  for (auto& v : x) v = rng.uniform();
  for (auto& v : m) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(picnn::score(params, x, m));
}
BENCHMARK(BM_PicnnForward)->Arg(9)->Arg(25)->Arg(225);

void BM_CounterpartValue(benchmark::State& state) {
  const GridSpec g = grid(static_cast<int>(state.range(0)), 4);
  const auto net = sim::make_score_network("random", g, 5);
  const auto pairs = sim::draw_pairs(g, DynamicsFamily::Drift, 0.3, 50, 6);
  const auto model = sim::calibrate_score(net, pairs, 0.1);
  const auto set = sim::object_set(model, pairs[0]);
  const auto poly = robust::make_polytopes(set);
  robust::CounterpartInput in;
  in.grid = g;
  in.path = robust::apply_moves(g, g.start(), {1, 3, 5, 7});
  in.objects = {&poly};
  in.initial = {initial_belief(g)};
  for (auto _ : state) benchmark::DoNotOptimize(robust::solve_counterpart(in, robust::Method::FixedBelief).value);
}
BENCHMARK(BM_CounterpartValue)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

// Dense rollout against the Gaussian basis (K = 16) in the planner.
void BM_PlanModel(benchmark::State& state) {
  const GridSpec g = grid(static_cast<int>(state.range(0)), 6);
  Rng rng(7);
  const Matrix m = draw_pair(g, DynamicsFamily::Drift, 0.3, rng).truth;
  std::unique_ptr<robust::PathEvaluator> ev;
  if (state.range(1))
    ev = std::make_unique<robust::BasisModelEvaluator>(g, std::vector<Matrix>{m}, std::vector<Vector>{},
                                                        BasisKind::Gaussian, 16);
  else
    ev = std::make_unique<robust::ModelEvaluator>(g, std::vector<Matrix>{m}, std::vector<Vector>{});
  robust::PlanOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(robust::plan(g, *ev, opt).capture);
}
BENCHMARK(BM_PlanModel)->ArgsProduct({{10, 15}, {0, 1}})->ArgNames({"E", "basis"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
