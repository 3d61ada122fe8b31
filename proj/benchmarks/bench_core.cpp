#include <benchmark/benchmark.h>

#include "rlab/algorithms.hpp"
#include "rlab/dataset.hpp"
#include "rlab/dp.hpp"
#include "rlab/metrics.hpp"

using namespace rlab;

namespace {

const GridWorld& world() {
  static const GridWorld gw = build_gridworld(builtin_layout(kDidacticLayoutName), 0.99);
  return gw;
}

const OfflineDataset& dataset() {
  static const OfflineDataset ds = [] {
    DatasetMeta meta;
    meta.n_trajectories = 200;
    meta.horizon = 200;
    return generate_dataset(meta);
  }();
  return ds;
}

const EmpiricalModel& model() {
  static const EmpiricalModel m =
      estimate_model(dataset(), world().mdp.n_states, world().mdp.n_actions, 1e-4);
  return m;
}

}  // namespace

static void BM_Rollout(benchmark::State& state) {
  const TabularPolicy pi = TabularPolicy::uniform(world().mdp.n_states, world().mdp.n_actions);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(world().mdp, pi, 400, seed++));
  }
}
BENCHMARK(BM_Rollout);

static void BM_EstimateModel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimate_model(dataset(), world().mdp.n_states, world().mdp.n_actions, 1e-4));
  }
}
BENCHMARK(BM_EstimateModel);

static void BM_PolicyEvaluation(benchmark::State& state) {
  const TabularPolicy pi = model().pi_beta_hat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy_evaluation(world().mdp, pi, 1e-8));
  }
}
BENCHMARK(BM_PolicyEvaluation);

static void BM_CqlBackup(benchmark::State& state) {
  RedsConfig cfg;
  cfg.alpha = 0.005;
  QTable q(model().n_states, model().n_actions, 0.0);
  const TabularPolicy pi = model().pi_beta_hat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cql_backup_closed_form(q, pi, model(), cfg));
  }
}
BENCHMARK(BM_CqlBackup);

static void BM_RedsIteration(benchmark::State& state) {
  RedsConfig cfg;
  QTable q(model().n_states, model().n_actions, 0.0);
  TabularPolicy pi = model().pi_beta_hat;
  for (auto _ : state) {
    const RhoTable rho = fit_rho(model(), q, pi, cfg);
    const QTable backup = empirical_backup(q, pi, model(), cfg.gamma);
    pi = penalized_softmax_response(backup, model(), &rho, cfg);
    q = reds_backup_closed_form(q, pi, rho, model(), cfg);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_RedsIteration);

static void BM_FitRho(benchmark::State& state) {
  RedsConfig cfg;
  QTable q(model().n_states, model().n_actions, 0.1);
  const TabularPolicy pi = model().pi_beta_hat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_rho(model(), q, pi, cfg));
  }
}
BENCHMARK(BM_FitRho);

static void BM_DivergenceReport(benchmark::State& state) {
  const TabularPolicy pi = TabularPolicy::uniform(model().n_states, model().n_actions);
  for (auto _ : state) {
    benchmark::DoNotOptimize(per_state_divergence(pi, model()));
  }
}
BENCHMARK(BM_DivergenceReport);

static void BM_Occupancy(benchmark::State& state) {
  TabularMdp emp = empirical_mdp(model(), world().mdp);
  const TabularPolicy pi = model().pi_beta_hat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(occupancy(emp, pi, 1e-8));
  }
}
BENCHMARK(BM_Occupancy);

BENCHMARK_MAIN();
