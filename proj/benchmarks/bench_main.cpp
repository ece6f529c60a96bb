#include <benchmark/benchmark.h>

#include "pflow/drift.hpp"
#include "pflow/experiments.hpp"
#include "pflow/flow.hpp"
#include "pflow/gabor.hpp"
#include "pflow/simulate.hpp"
#include "pflow/specfun.hpp"

using namespace pflow;

namespace {

void BM_OwensT(benchmark::State& state) {
  double h = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::owens_t(h, 0.7));
    h = h > 4.0 ? -4.0 : h + 0.01;
  }
}
BENCHMARK(BM_OwensT);

void BM_Drift(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const Rule rule = state.range(1) == 0 ? Rule::kSupervised : Rule::kReinforce;
  const TaskSpec task = IsotropicTaskParams::canonical(n, 1.0).to_task();
  const Vector w = initial_weights(task.mu_pos(), 60.0, 0.5);
  const RuleConfig cfg{rule, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(drift(task, cfg, w));
}
BENCHMARK(BM_Drift)->ArgsProduct({{10, 500}, {0, 1}});

void BM_DenseDrift(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const Vector mu = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  const Matrix s = Matrix::Identity(n, n) + 0.1 * mu * mu.transpose();
  const TaskSpec task(mu, -mu, Covariance::dense(s), Covariance::dense(s));
  const Vector w = 0.5 * mu;
  for (auto _ : state) benchmark::DoNotOptimize(sl_drift(task, w, 0.1));
}
BENCHMARK(BM_DenseDrift)->Arg(784)->Arg(1440);

void BM_MeanFlow(benchmark::State& state) {
  const TaskSpec task = IsotropicTaskParams::canonical(500, 1.0).to_task();
  const Vector w0 = initial_weights(task.mu_pos(), 60.0, 0.5);
  FlowConfig cfg;
  cfg.t_max = 1.0;
  cfg.record_every = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_mean_flow(task, RuleConfig{}, w0, cfg));
  }
}
BENCHMARK(BM_MeanFlow)->Unit(benchmark::kMillisecond);

void BM_SimulationSteps(benchmark::State& state) {
  const TaskSpec task = IsotropicTaskParams::canonical(500, 1.0).to_task();
  const Vector w0 = initial_weights(task.mu_pos(), 60.0, 0.5);
  const Rule rule = state.range(0) == 0 ? Rule::kSupervised : Rule::kReinforce;
  SimConfig cfg;
  cfg.steps = 1000;
  cfg.record_every = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble(task, RuleConfig{rule, 0.0}, w0, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_SimulationSteps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaborFeatures(benchmark::State& state) {
  const GaborBank bank(GaborBankConfig{}, 28, 28);
  const Matrix images = Matrix::Random(784, 256).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(bank.apply(images));
  state.SetItemsProcessed(state.iterations() * images.cols());
}
BENCHMARK(BM_GaborFeatures)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
