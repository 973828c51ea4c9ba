#include <benchmark/benchmark.h>

#include "volspill/energy.hpp"
#include "volspill/mean_models.hpp"
#include "volspill/simulate.hpp"

namespace vs = volspill;

namespace {

vs::Exec exec_of(const benchmark::State& state) { return state.range(0) ? vs::Exec::Parallel : vs::Exec::Serial; }

vs::Dgp garch_dgp(int T) {
  vs::Dgp d;
  d.specs = {vs::GarchSpec::garch11()};
  vs::GarchParams p;
  p.omega = 0.05;
  p.alpha = Eigen::VectorXd::Constant(1, 0.05);
  p.beta = Eigen::VectorXd::Constant(1, 0.90);
  d.params = {p};
  d.T = T;
  d.seed = 7;
  return d;
}

void BM_MarginalCostMonteCarlo(benchmark::State& state) {
  const vs::PlantParams plant{vs::Fuel::Coal, 0.4, 95.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(vs::marginal_cost_variance_mc(plant, 2.0, 0.02, 0.3, 0.005, 0.4, 1'000'000, 1, exec_of(state)));
  }
}
BENCHMARK(BM_MarginalCostMonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ArmaOrderGrid(benchmark::State& state) {
  const vs::Simulation sim = vs::simulate(garch_dgp(1500));
  const Eigen::VectorXd x = sim.returns.values.col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vs::select_arma({x.data(), static_cast<std::size_t>(x.size())}, 3, 3, vs::Criterion::Aic,
                                             true, exec_of(state)));
  }
}
BENCHMARK(BM_ArmaOrderGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GarchRecovery(benchmark::State& state) {
  const vs::Dgp d = garch_dgp(2000);
  for (auto _ : state) benchmark::DoNotOptimize(vs::recovery_study(d, 10, exec_of(state)));
}
BENCHMARK(BM_GarchRecovery)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
