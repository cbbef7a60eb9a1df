#include <benchmark/benchmark.h>

#include "dra/analysis.hpp"
#include "dra/delaynet.hpp"
#include "dra/dynamics.hpp"
#include "dra/rng.hpp"

using namespace dra;

namespace {

Problem make_problem(int n) {
  SplitMix64 rng(7);
  Problem p;
  p.net = Network::k_hop_cycle(n, 2, 1.0);
  for (int i = 0; i < n; ++i) {
    p.costs.push_back(NodeCost::quadratic(rng.uniform(0.03, 0.1), rng.uniform(10.0, 30.0))
                          .with_box(Box{20.0, 200.0}, 0.5));
    p.roles.push_back(NodeRole::generator);
  }
  p.demand = 70.0 * n;
  return p;
}

Eigen::VectorXd make_init(const Problem& p) {
  const std::vector<Box> boxes(p.size(), Box{20.0, 200.0});
  return feasible_init_equal_surplus(p.roles, p.demand, boxes);
}

void BM_StepEuler(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)));
  const NonlinearMap id = NonlinearMap::identity();
  SimState s{make_init(p), 0};
  for (auto _ : state) {
    step_euler(p, s, id, id, 1e-4);
    benchmark::DoNotOptimize(s.z.data());
  }
  state.SetItemsProcessed(state.iterations() * p.size());
}
BENCHMARK(BM_StepEuler)->Arg(10)->Arg(50)->Arg(200);

void BM_StepDelayed(benchmark::State& state) {
  const Problem p = make_problem(10);
  const int tau_bar = static_cast<int>(state.range(0));
  const NonlinearMap id = NonlinearMap::identity();
  const DelaySchedule schedule =
      DelaySchedule::sample(p.net, tau_bar, DelayMode::time_varying, 3);
  SimState s{make_init(p), 0};
  Eigen::VectorXd phi0(p.size());
  for (int i = 0; i < p.size(); ++i) phi0[i] = p.scaled_gradient(i, s.z[i]);
  GradientHistory history(tau_bar, phi0);
  for (auto _ : state) {
    step_delayed(p, s, history, schedule, id, 1e-4);
    benchmark::DoNotOptimize(s.z.data());
  }
}
BENCHMARK(BM_StepDelayed)->Arg(0)->Arg(2)->Arg(5);

void BM_Spectrum(benchmark::State& state) {
  const Network net = Network::k_hop_cycle(static_cast<int>(state.range(0)), 2, 1.0);
  for (auto _ : state) {
    const Spectrum s = spectrum(net);
    benchmark::DoNotOptimize(s.lambda2);
  }
}
BENCHMARK(BM_Spectrum)->Arg(10)->Arg(100);

void BM_Oracle(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const OracleSolution sol = solve_centralized(p);
    benchmark::DoNotOptimize(sol.lambda_star);
  }
}
BENCHMARK(BM_Oracle)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
