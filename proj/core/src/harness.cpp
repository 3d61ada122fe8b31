#include "rlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include "rlab/rng.hpp"

namespace rlab {

void ExperimentConfig::validate() const {
  detail::check(!seeds.empty(), "seeds must be nonempty");
  detail::check(eval_episodes >= 1, "eval_episodes must be >= 1");
  detail::check(eval_horizon >= 1, "eval_horizon must be >= 1");
}

std::pair<double, HeatmapGrid> evaluate_policy(const GridWorld& world, const TabularPolicy& policy,
                                               int episodes, int horizon, std::uint64_t seed) {
  detail::check(episodes >= 1, "episodes must be >= 1");
  std::vector<double> visits(world.mdp.n_states, 0.0);
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    const Trajectory traj = rollout(world.mdp, policy, horizon, derive_seed(seed, e));
    for (const Transition& t : traj) visits[t.state] += 1.0;
    if (!traj.empty()) {
      visits[traj.back().next_state] += 1.0;
      if (traj.back().done) ++wins;
    }
  }
  return {static_cast<double>(wins) / episodes, heatmap_from_state_counts(world, visits)};
}

const Checkpoint& oracle_select(const std::vector<Checkpoint>& checkpoints) {
  detail::check(!checkpoints.empty(), "no checkpoints");
  const Checkpoint* best = nullptr;
  for (const Checkpoint& ck : checkpoints) {
    if (!ck.eval_success) continue;
    if (!best || *ck.eval_success > *best->eval_success) best = &ck;
  }
  return best ? *best : checkpoints.back();
}

RunResult run_experiment(const ExperimentConfig& cfg, const GridWorld& world,
                         const OfflineDataset& dataset) {
  cfg.validate();
  const EmpiricalModel model =
      estimate_model(dataset, world.mdp.n_states, world.mdp.n_actions, cfg.eps_b);
  TabularMdp empirical = empirical_mdp(model, world.mdp);
  empirical.gamma = cfg.trainer.gamma;

  RunResult result;
  result.method = to_string(cfg.method);
  TrainOptions opts;
  opts.eval_every = 10;
  opts.eval_episodes = cfg.eval_episodes;
  opts.eval_horizon = cfg.eval_horizon;

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const std::uint64_t seed = cfg.seeds[i];
    const std::vector<Checkpoint> cks =
        train(cfg.method, model, world.mdp, cfg.trainer, seed, opts);
    const Checkpoint& selected = oracle_select(cks);
    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.selected_iter = selected.iteration;
    outcome.success = selected.eval_success.value_or(0.0);

    const DivergenceReport rep = per_state_divergence(selected.pi, model);
    const std::vector<double> d_pi = occupancy(empirical, selected.pi, 1e-10);
    const ConcentrabilityEstimate cd = differential_concentrability(
        selected.pi, model, d_pi, ConcentrabilityMode::ExactTabular);
    outcome.std_d = rep.std_dev;
    outcome.max_d = rep.max;
    outcome.c_diff = cd.value;
    if (i == 0) {
      result.divergence = rep;
      result.heatmap =
          evaluate_policy(world, selected.pi, cfg.eval_episodes, cfg.eval_horizon,
                          derive_seed(seed, selected.iteration))
              .second;
    }
    sum += outcome.success;
    sum_sq += outcome.success * outcome.success;
    result.seeds.push_back(outcome);
  }
  const double n = static_cast<double>(cfg.seeds.size());
  result.mean_success = sum / n;
  result.std_success = std::sqrt(std::max(0.0, sum_sq / n - result.mean_success * result.mean_success));
  return result;
}

void set_trainer_param(RedsConfig& cfg, const std::string& name, double value) {
  if (name == "alpha") {
    cfg.alpha = value;
  } else if (name == "tau") {
    cfg.tau = value;
  } else if (name == "beta_ent") {
    cfg.beta_ent = value;
  } else if (name == "n_iters") {
    cfg.n_iters = static_cast<int>(value);
  } else if (name == "pi_weight") {
    cfg.pi_weight = value;
  } else {
    throw RlabError("unknown trainer parameter: " + name);
  }
}

std::vector<RunResult> sweep(const ExperimentConfig& base, const GridWorld& world,
                             const OfflineDataset& dataset,
                             const std::vector<std::pair<std::string, std::vector<double>>>& grid,
                             int jobs) {
  // Materialize the Cartesian product in row-major order.
  std::vector<std::vector<std::pair<std::string, double>>> cells;
  cells.push_back({});
  for (const auto& [name, values] : grid) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& cell : cells) {
      for (double v : values) {
        auto extended = cell;
        extended.emplace_back(name, v);
        next.push_back(std::move(extended));
      }
    }
    cells = std::move(next);
  }

  auto run_cell = [&](const std::vector<std::pair<std::string, double>>& cell) {
    ExperimentConfig cfg = base;
    for (const auto& [name, value] : cell) set_trainer_param(cfg.trainer, name, value);
    RunResult r = run_experiment(cfg, world, dataset);
    r.params = cell;
    return r;
  };

  std::vector<RunResult> results(cells.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = run_cell(cells[i]);
  } else {
    std::vector<std::future<RunResult>> futures;
    futures.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      futures.push_back(std::async(std::launch::async, run_cell, cells[i]));
      if (static_cast<int>(futures.size()) == jobs || i + 1 == cells.size()) {
        const std::size_t first = i + 1 - futures.size();
        for (std::size_t k = 0; k < futures.size(); ++k) results[first + k] = futures[k].get();
        futures.clear();
      }
    }
  }
  return results;
}

TabularPolicy train_audit_probe(const OfflineDataset& dataset, const GridWorld& world,
                                double eps_b) {
  const EmpiricalModel model =
      estimate_model(dataset, world.mdp.n_states, world.mdp.n_actions, eps_b);
  RedsConfig cfg;
  cfg.alpha = kAuditProbeAlpha;
  TrainOptions opts;
  opts.eval_every = 0;
  const std::vector<Checkpoint> cks = train(Method::CqlClosed, model, world.mdp, cfg, 0, opts);
  return cks.back().pi;
}

std::pair<DivergenceReport, ConcentrabilityEstimate> audit_heteroskedasticity(
    const OfflineDataset& dataset, const GridWorld& world, const TabularPolicy& policy,
    double eps_b) {
  const EmpiricalModel model =
      estimate_model(dataset, world.mdp.n_states, world.mdp.n_actions, eps_b);
  TabularMdp empirical = empirical_mdp(model, world.mdp);
  const DivergenceReport rep = per_state_divergence(policy, model);
  const std::vector<double> d_pi = occupancy(empirical, policy, 1e-10);
  const ConcentrabilityEstimate cd = differential_concentrability(
      policy, model, d_pi, ConcentrabilityMode::ExactTabular);
  return {rep, cd};
}

std::vector<MonotonicityRow> monotonicity_check(const OfflineDataset& dataset,
                                                const GridWorld& world,
                                                const std::vector<double>& alpha_grid,
                                                const RedsConfig& base, double eps_b) {
  const EmpiricalModel model =
      estimate_model(dataset, world.mdp.n_states, world.mdp.n_actions, eps_b);
  TabularMdp empirical = empirical_mdp(model, world.mdp);
  empirical.gamma = base.gamma;
  std::vector<MonotonicityRow> rows;
  TrainOptions opts;
  opts.eval_every = 0;
  for (double alpha : alpha_grid) {
    RedsConfig cfg = base;
    cfg.alpha = alpha;
    const std::vector<Checkpoint> cks = train(Method::CqlClosed, model, world.mdp, cfg, 0, opts);
    const TabularPolicy& pi = cks.back().pi;
    const std::vector<double> d_pi = occupancy(empirical, pi, 1e-10);
    double expected = 0.0;
    for (int s = 0; s < model.n_states; ++s) {
      if (d_pi[s] == 0.0) continue;
      expected += d_pi[s] * d_cql(pi.probs.row(s), model.pi_beta_hat.probs.row(s));
    }
    rows.push_back({alpha, expected});
  }
  return rows;
}

namespace {

void csv_run_row(std::string& out, const RunResult& r, bool per_seed, std::size_t seed_idx) {
  char buf[256];
  const std::string param = r.params.empty() ? "-" : r.params.front().first;
  const double value = r.params.empty() ? 0.0 : r.params.front().second;
  if (per_seed) {
    const SeedOutcome& o = r.seeds[seed_idx];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%llu,%.12g,%.12g,%.12g,%.12g,%d\n",
                  r.method.c_str(), param.c_str(), value,
                  static_cast<unsigned long long>(o.seed), o.success, o.std_d, o.max_d, o.c_diff,
                  o.selected_iter);
  } else {
    const SeedOutcome& first = r.seeds.front();
    std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n",
                  r.method.c_str(), param.c_str(), value, r.seeds.size(), r.mean_success,
                  r.std_success, first.std_d, first.max_d, first.c_diff, first.selected_iter);
  }
  out += buf;
}

}  // namespace

void write_results_csv(const std::vector<RunResult>& results, const std::string& path) {
  std::string body =
      "method,param,value,n_seeds,mean_success,std_success,std_D,max_D,C_diff,selected_iter\n";
  for (const RunResult& r : results) csv_run_row(body, r, false, 0);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << body;
}

void write_runs_csv(const std::vector<RunResult>& results, const std::string& path) {
  std::string body = "method,param,value,seed,success,std_D,max_D,C_diff,selected_iter\n";
  for (const RunResult& r : results) {
    for (std::size_t i = 0; i < r.seeds.size(); ++i) csv_run_row(body, r, true, i);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << body;
}

namespace {

std::string param_tag(const RunResult& r) {
  if (r.params.empty()) return "default";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%g", r.params.front().first.c_str(),
                r.params.front().second);
  return buf;
}

void emit_heatmaps(const RunResult& r, const GridWorld& world, const std::string& out_dir) {
  const std::string stem = out_dir + "/heatmap_" + r.method + "_" + param_tag(r);
  write_heatmap_pgm(r.heatmap, stem + ".pgm");
  write_heatmap_svg(r.heatmap, world.spec, stem + ".svg");
}

}  // namespace

DidacticReport reproduce_didactic(const OfflineDataset& dataset, const std::string& out_dir,
                                  int jobs) {
  std::filesystem::create_directories(out_dir);
  const GridWorld world = world_from_meta(dataset.meta);

  ExperimentConfig base;
  base.data = dataset.meta;
  base.out_dir = out_dir;

  DidacticReport report;
  base.method = Method::Awr;
  report.awr = sweep(base, world, dataset, {{"tau", {0.1, 0.3, 1.0}}}, jobs);
  base.method = Method::CqlClosed;
  base.trainer = RedsConfig{};
  base.trainer.alpha = 1.0;
  report.cql = sweep(base, world, dataset, {{"alpha", {0.1, 1.0, 5.0, 10.0}}}, jobs);
  base.method = Method::RedsClosed;
  base.trainer = RedsConfig{};
  report.reds = run_experiment(base, world, dataset);

  std::vector<RunResult> all;
  all.insert(all.end(), report.awr.begin(), report.awr.end());
  all.insert(all.end(), report.cql.begin(), report.cql.end());
  all.push_back(report.reds);
  write_results_csv(all, out_dir + "/results.csv");
  write_runs_csv(all, out_dir + "/runs.csv");
  for (const RunResult& r : all) emit_heatmaps(r, world, out_dir);
  return report;
}

double heatmap_mass_near_goal(const HeatmapGrid& grid, const GridWorld& world,
                              int max_goal_distance) {
  const std::vector<int> dist = world.goal_distance();
  double near = 0.0, total = 0.0;
  for (int s = 0; s < world.mdp.n_states; ++s) {
    const Cell c = world.state_to_cell[s];
    const double f = grid.at(c.x, c.y);
    total += f;
    if (dist[s] >= 0 && dist[s] <= max_goal_distance) near += f;
  }
  return total > 0.0 ? near / total : 0.0;
}

}  // namespace rlab
