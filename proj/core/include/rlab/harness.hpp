#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rlab/algorithms.hpp"
#include "rlab/heatmap.hpp"
#include "rlab/metrics.hpp"

namespace rlab {

struct ExperimentConfig {
  DatasetMeta data;
  Method method = Method::RedsClosed;
  RedsConfig trainer;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int eval_episodes = 100;
  int eval_horizon = 400;
  double eps_b = 1e-4;
  std::string out_dir;

  void validate() const;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double success = 0.0;
  int selected_iter = 0;
  double std_d = 0.0;
  double max_d = 0.0;
  double c_diff = 0.0;
};

struct RunResult {
  std::string method;
  std::vector<std::pair<std::string, double>> params;  // swept parameters, if any
  std::vector<SeedOutcome> seeds;
  double mean_success = 0.0;
  double std_success = 0.0;
  DivergenceReport divergence;  // audit of the first seed's selected policy
  HeatmapGrid heatmap;          // evaluation visitation of the first seed
};

// Rolls `episodes` evaluation episodes and reports the goal-reaching rate
// plus the visitation heatmap over all states touched. Episode k uses the
// derived seed (seed, k), matching evaluate_success_rate exactly.
std::pair<double, HeatmapGrid> evaluate_policy(const GridWorld& world, const TabularPolicy& policy,
                                               int episodes, int horizon, std::uint64_t seed);

// Oracle checkpoint selection: the evaluated checkpoint with the highest
// eval_success, ties resolved to the earliest iteration. Falls back to the
// last checkpoint when nothing was evaluated.
const Checkpoint& oracle_select(const std::vector<Checkpoint>& checkpoints);

// Trains per seed, oracle-selects, and attaches the divergence and
// concentrability audit of each selected policy.
RunResult run_experiment(const ExperimentConfig& cfg, const GridWorld& world,
                         const OfflineDataset& dataset);

// Cartesian product over `grid` (parameter name -> values), one RunResult per
// cell in row-major order. `jobs` > 1 runs cells in parallel; the results are
// identical to a sequential run.
std::vector<RunResult> sweep(const ExperimentConfig& base, const GridWorld& world,
                             const OfflineDataset& dataset,
                             const std::vector<std::pair<std::string, std::vector<double>>>& grid,
                             int jobs = 1);

// Sets a trainer knob by name: alpha, tau, beta_ent, n_iters, pi_weight.
void set_trainer_param(RedsConfig& cfg, const std::string& name, double value);

// Probe recipe for the heteroskedasticity audits: a conservative policy
// trained on the dataset itself, at a conservatism level where offline
// training is effective on this reward scale. Shared by the audit command
// and the acceptance study.
inline constexpr double kAuditProbeAlpha = 0.003;
TabularPolicy train_audit_probe(const OfflineDataset& dataset, const GridWorld& world,
                                double eps_b = 1e-4);

std::pair<DivergenceReport, ConcentrabilityEstimate> audit_heteroskedasticity(
    const OfflineDataset& dataset, const GridWorld& world, const TabularPolicy& policy,
    double eps_b = 1e-4);

struct MonotonicityRow {
  double alpha = 0.0;
  double expected_divergence = 0.0;  // E_{s ~ d_hat^pi}[D(pi_alpha, pi_beta_hat)(s)]
};

// Trains CQL at each alpha on the dataset and reports the occupancy-weighted
// divergence of the converged policy under the empirical MDP.
std::vector<MonotonicityRow> monotonicity_check(const OfflineDataset& dataset,
                                                const GridWorld& world,
                                                const std::vector<double>& alpha_grid,
                                                const RedsConfig& base, double eps_b = 1e-4);

// Comparison table: one row per run. Columns:
// method,param,value,n_seeds,mean_success,std_success,std_D,max_D,C_diff,selected_iter
void write_results_csv(const std::vector<RunResult>& results, const std::string& path);
// Full detail: one row per (run, seed). Columns:
// method,param,value,seed,success,std_D,max_D,C_diff,selected_iter
void write_runs_csv(const std::vector<RunResult>& results, const std::string& path);

// Full navigation study: the AWR temperature sweep, the CQL alpha sweep and
// one ReDS run, with heatmaps (PGM and SVG) and the comparison table.
struct DidacticReport {
  std::vector<RunResult> awr;  // tau in {0.1, 0.3, 1.0)
  std::vector<RunResult> cql;  // alpha in {0.1, 1, 5, 10}
  RunResult reds;
};

DidacticReport reproduce_didactic(const OfflineDataset& dataset, const std::string& out_dir,
                                  int jobs = 1);

// Fraction of heatmap mass on cells at most `max_goal_distance` BFS steps
// from the goal; used to measure how deep a policy penetrates the maze.
double heatmap_mass_near_goal(const HeatmapGrid& grid, const GridWorld& world,
                              int max_goal_distance);

}  // namespace rlab
