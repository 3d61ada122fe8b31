#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "rlab/harness.hpp"
#include "test_util.hpp"

using namespace rlab;

namespace {

const GridWorld& didactic_world() {
  static const GridWorld gw = build_gridworld(builtin_layout(kDidacticLayoutName), 0.99);
  return gw;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("evaluate_policy on the didactic maze") {
  const GridWorld& gw = didactic_world();
  SUBCASE("the value-iteration optimal policy always succeeds") {
    const TabularPolicy greedy = greedy_policy(gw.mdp, value_iteration(gw.mdp, 1e-10));
    const auto [rate, grid] = evaluate_policy(gw, greedy, 20, 400, 9);
    CHECK(rate == 1.0);
    CHECK(grid.total() == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("a uniform policy with horizon 1 never reaches the distant goal") {
    const auto [rate, grid] =
        evaluate_policy(gw, TabularPolicy::uniform(gw.mdp.n_states, gw.mdp.n_actions), 50, 1, 4);
    CHECK(rate == 0.0);
    CHECK(grid.total() == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("equal seeds give identical evaluations") {
    const TabularPolicy pi = TabularPolicy::uniform(gw.mdp.n_states, gw.mdp.n_actions);
    const auto [r1, g1] = evaluate_policy(gw, pi, 30, 50, 123);
    const auto [r2, g2] = evaluate_policy(gw, pi, 30, 50, 123);
    CHECK(r1 == r2);
    CHECK(g1.freq == g2.freq);
    CHECK(r1 == evaluate_success_rate(gw.mdp, pi, 30, 50, 123));
  }
}

TEST_CASE("oracle checkpoint selection") {
  auto make = [](int iter, double success) {
    Checkpoint ck;
    ck.iteration = iter;
    ck.eval_success = success;
    return ck;
  };
  SUBCASE("single checkpoint selects itself") {
    std::vector<Checkpoint> cks;
    cks.push_back(make(3, 0.4));
    CHECK(oracle_select(cks).iteration == 3);
  }
  SUBCASE("strictly increasing curve selects the last") {
    std::vector<Checkpoint> cks;
    for (int i = 1; i <= 5; ++i) cks.push_back(make(i * 10, 0.1 * i));
    CHECK(oracle_select(cks).iteration == 50);
  }
  SUBCASE("ties resolve to the earliest iteration") {
    std::vector<Checkpoint> cks;
    cks.push_back(make(10, 0.5));
    cks.push_back(make(20, 0.5));
    CHECK(oracle_select(cks).iteration == 10);
  }
  SUBCASE("unevaluated checkpoints fall back to the last") {
    std::vector<Checkpoint> cks(3);
    cks[0].iteration = 1;
    cks[1].iteration = 2;
    cks[2].iteration = 3;
    CHECK(oracle_select(cks).iteration == 3);
  }
}

TEST_CASE("heatmaps") {
  const GridWorld& gw = didactic_world();
  std::vector<double> counts(gw.mdp.n_states, 1.0);
  counts[gw.start_state] = 10.0;
  const HeatmapGrid grid = heatmap_from_state_counts(gw, counts);
  CHECK(grid.total() == doctest::Approx(1.0).epsilon(1e-9));

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rlab_test_harness";
  fs::create_directories(dir);
  const std::string pgm = (dir / "map.pgm").string();
  write_heatmap_pgm(grid, pgm);
  write_heatmap_pgm(grid, (dir / "map2.pgm").string());
  CHECK(slurp(pgm) == slurp((dir / "map2.pgm").string()));

  const HeatmapGrid back = read_heatmap_pgm(pgm);
  CHECK(back.width == grid.width);
  CHECK(back.height == grid.height);
  // The start cell carries 10x the mass of any other visited cell.
  CHECK(back.at(gw.spec.start.x, gw.spec.start.y) ==
        doctest::Approx(10.0 * back.at(5, 7)).epsilon(0.05));
  write_heatmap_svg(grid, gw.spec, (dir / "map.svg").string());
  CHECK(fs::file_size(dir / "map.svg") > 1000);
}

TEST_CASE("heatmap mass near the goal distinguishes deep and shallow policies") {
  const GridWorld& gw = didactic_world();
  std::vector<double> near_goal(gw.mdp.n_states, 0.0), near_start(gw.mdp.n_states, 0.0);
  near_goal[gw.goal_state] = 1.0;
  near_start[gw.start_state] = 1.0;
  CHECK(heatmap_mass_near_goal(heatmap_from_state_counts(gw, near_goal), gw, 5) == 1.0);
  CHECK(heatmap_mass_near_goal(heatmap_from_state_counts(gw, near_start), gw, 5) == 0.0);
}

TEST_CASE("audit of a homogeneous dataset against its own behavior policy is flat") {
  DatasetMeta meta;
  meta.behavior.variant = BehaviorVariant::Homogeneous;
  meta.seed = 5;
  const GridWorld& gw = didactic_world();
  const TabularPolicy behavior = make_behavior_policy(gw, meta.behavior);
  const OfflineDataset ds = collect_dataset(gw.mdp, behavior, meta);
  const auto [report, cdiff] = audit_heteroskedasticity(ds, gw, behavior);
  CHECK(report.std_dev <= 0.05);
  CHECK(report.mean <= 0.05);
  CHECK(cdiff.value >= 0.0);
}

TEST_CASE("small sweep runs every cell and parallel execution matches sequential") {
  DatasetMeta meta;
  meta.n_trajectories = 120;
  meta.horizon = 100;
  meta.seed = 3;
  const GridWorld& gw = didactic_world();
  const OfflineDataset ds = generate_dataset(meta);

  ExperimentConfig base;
  base.data = meta;
  base.method = Method::Awr;
  base.seeds = {0, 1};
  base.eval_episodes = 10;
  base.eval_horizon = 100;
  base.trainer.n_iters = 5;

  SUBCASE("empty grid is a single run") {
    const std::vector<RunResult> rs = sweep(base, gw, ds, {});
    CHECK(rs.size() == 1);
    CHECK(rs[0].params.empty());
  }
  SUBCASE("cartesian product, order independence") {
    const std::vector<std::pair<std::string, std::vector<double>>> grid = {
        {"tau", {0.1, 1.0}}};
    const std::vector<RunResult> seq = sweep(base, gw, ds, grid, 1);
    const std::vector<RunResult> par = sweep(base, gw, ds, grid, 2);
    REQUIRE(seq.size() == 2);
    REQUIRE(par.size() == 2);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      CHECK(seq[i].mean_success == par[i].mean_success);
      CHECK(seq[i].seeds[0].std_d == par[i].seeds[0].std_d);
      CHECK(seq[i].heatmap.freq == par[i].heatmap.freq);
    }
  }
}

TEST_CASE("monotonicity rows") {
  DatasetMeta meta;
  meta.n_trajectories = 150;
  meta.horizon = 120;
  meta.seed = 9;
  const GridWorld& gw = didactic_world();
  const OfflineDataset ds = generate_dataset(meta);
  RedsConfig base;
  base.n_iters = 60;
  SUBCASE("grid of one produces a single row") {
    const std::vector<MonotonicityRow> rows = monotonicity_check(ds, gw, {1.0}, base);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alpha == 1.0);
    CHECK(rows[0].expected_divergence >= 0.0);
  }
  SUBCASE("alpha zero reports the divergence of the unregularized policy") {
    const std::vector<MonotonicityRow> rows = monotonicity_check(ds, gw, {0.0}, base);
    const EmpiricalModel model = estimate_model(ds, gw.mdp.n_states, gw.mdp.n_actions, 1e-4);
    TrainOptions opts;
    opts.eval_every = 0;
    RedsConfig cfg = base;
    cfg.alpha = 0.0;
    const std::vector<Checkpoint> cks = train(Method::CqlClosed, model, gw.mdp, cfg, 0, opts);
    TabularMdp emp = empirical_mdp(model, gw.mdp);
    emp.gamma = cfg.gamma;
    const std::vector<double> d_pi = occupancy(emp, cks.back().pi, 1e-10);
    double expected = 0.0;
    for (int s = 0; s < model.n_states; ++s) {
      expected += d_pi[s] * d_cql(cks.back().pi.probs.row(s), model.pi_beta_hat.probs.row(s));
    }
    CHECK(rows[0].expected_divergence == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("results CSV layout") {
  RunResult r;
  r.method = "awr";
  r.params = {{"tau", 0.1}};
  r.seeds = {{0, 0.5, 7, 0.1, 0.2, 0.3}, {1, 0.7, 9, 0.1, 0.2, 0.3}};
  r.mean_success = 0.6;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rlab_test_harness";
  fs::create_directories(dir);
  write_results_csv({r}, (dir / "results.csv").string());
  write_runs_csv({r}, (dir / "runs.csv").string());
  const std::string results = slurp((dir / "results.csv").string());
  const std::string runs = slurp((dir / "runs.csv").string());
  CHECK(results.find("awr,tau,0.1,2,0.6") != std::string::npos);
  CHECK(std::count(runs.begin(), runs.end(), '\n') == 3);  // header + one row per seed
}
