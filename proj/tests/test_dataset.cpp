#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rlab/dp.hpp"
#include "rlab/harness.hpp"
#include "test_util.hpp"

using namespace rlab;

namespace {

const GridWorld& didactic_world() {
  static const GridWorld gw = build_gridworld(builtin_layout(kDidacticLayoutName), 0.99);
  return gw;
}

// Shared across the dataset tests; collection is the slow part.
const OfflineDataset& didactic_dataset() {
  static const OfflineDataset ds = [] {
    DatasetMeta meta;  // didactic defaults: 1000 trajectories, horizon 400, seed 7
    return generate_dataset(meta);
  }();
  return ds;
}

}  // namespace

TEST_CASE("hallway cells are deterministic toward the goal") {
  const GridWorld& gw = didactic_world();
  BehaviorSpec spec;
  const TabularPolicy pi = make_behavior_policy(gw, spec);
  int checked = 0;
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    const Cell c = gw.state_to_cell[s];
    if (gw.spec.region_at(c.x, c.y) != Region::Hallway) continue;
    const int toward = toward_goal_action(gw, s);
    CHECK(pi.probs(s, toward) == doctest::Approx(1.0));
    ++checked;
  }
  CHECK(checked == 4);
}

TEST_CASE("room cells put 0.8 on the away action and 0.05 elsewhere") {
  const GridWorld& gw = didactic_world();
  const TabularPolicy pi = make_behavior_policy(gw, BehaviorSpec{});
  int n_rooms = 0;
  const std::vector<int> room_id = gw.room_components(&n_rooms);
  CHECK(n_rooms == 3);
  const std::vector<int> away = room_away_actions(gw);
  // Top rooms exit downward, so their bias is Up; the goal room's is Left.
  CHECK(away[0] == static_cast<int>(Action::Up));
  CHECK(away[1] == static_cast<int>(Action::Up));
  CHECK(away[2] == static_cast<int>(Action::Left));
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (room_id[s] < 0 || s == gw.goal_state) continue;
    for (int a = 0; a < gw.mdp.n_actions; ++a) {
      CHECK(pi.probs(s, a) == doctest::Approx(a == away[room_id[s]] ? 0.8 : 0.05));
    }
  }
}

TEST_CASE("zero bias strength degenerates to the uniform room rule") {
  const GridWorld& gw = didactic_world();
  BehaviorSpec spec;
  spec.bias_strength = 0.0;
  const TabularPolicy pi = make_behavior_policy(gw, spec);
  int n_rooms = 0;
  const std::vector<int> room_id = gw.room_components(&n_rooms);
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (room_id[s] < 0) continue;
    for (int a = 0; a < gw.mdp.n_actions; ++a) {
      CHECK(pi.probs(s, a) == doctest::Approx(0.2));
    }
  }
}

TEST_CASE("homogeneous variant is uniform at every cell") {
  const GridWorld& gw = didactic_world();
  BehaviorSpec spec;
  spec.variant = BehaviorVariant::Homogeneous;
  const TabularPolicy pi = make_behavior_policy(gw, spec);
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    for (int a = 0; a < gw.mdp.n_actions; ++a) {
      CHECK(pi.probs(s, a) == doctest::Approx(0.2));
    }
  }
}

TEST_CASE("noisy variant mixes extra uniform noise per room") {
  const GridWorld& gw = didactic_world();
  BehaviorSpec spec;
  spec.variant = BehaviorVariant::Noisy;
  spec.room_noise = {0.0, 0.5, 0.0};
  const TabularPolicy pi = make_behavior_policy(gw, spec);
  int n_rooms = 0;
  const std::vector<int> room_id = gw.room_components(&n_rooms);
  const std::vector<int> away = room_away_actions(gw);
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (room_id[s] < 0 || s == gw.goal_state) continue;
    const double expected_away =
        room_id[s] == 1 ? 0.5 * 0.8 + 0.5 * 0.2 : 0.8;  // room 1 gets eps = 0.5
    CHECK(pi.probs(s, away[room_id[s]]) == doctest::Approx(expected_away));
  }
}

TEST_CASE("biased variant flips the bias direction on alternate rooms") {
  const GridWorld& gw = didactic_world();
  BehaviorSpec spec;
  spec.variant = BehaviorVariant::Biased;
  const TabularPolicy pi = make_behavior_policy(gw, spec);
  int n_rooms = 0;
  const std::vector<int> room_id = gw.room_components(&n_rooms);
  const std::vector<int> away = room_away_actions(gw);
  auto flip = [](int a) { return a % 2 == 0 ? a + 1 : a - 1; };
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (room_id[s] < 0 || s == gw.goal_state) continue;
    const int heavy = room_id[s] % 2 == 1 ? flip(away[room_id[s]]) : away[room_id[s]];
    CHECK(pi.probs(s, heavy) == doctest::Approx(0.8));
  }
}

TEST_CASE("single short trajectory produces one transition") {
  const GridWorld& gw = didactic_world();
  DatasetMeta meta;
  meta.n_trajectories = 1;
  meta.horizon = 1;
  const OfflineDataset ds =
      collect_dataset(gw.mdp, make_behavior_policy(gw, meta.behavior), meta);
  CHECK(ds.transitions.size() == 1);
}

TEST_CASE("equal seeds collect identical datasets; regeneration is bit-exact") {
  DatasetMeta meta;
  meta.n_trajectories = 25;
  meta.horizon = 60;
  meta.seed = 11;
  const OfflineDataset a = generate_dataset(meta);
  const OfflineDataset b = generate_dataset(meta);
  REQUIRE(a.transitions.size() == b.transitions.size());
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    CHECK(a.transitions[i].state == b.transitions[i].state);
    CHECK(a.transitions[i].action == b.transitions[i].action);
    CHECK(a.transitions[i].next_state == b.transitions[i].next_state);
  }
  meta.seed = 12;
  const OfflineDataset c = generate_dataset(meta);
  bool differs = a.transitions.size() != c.transitions.size();
  for (std::size_t i = 0; !differs && i < a.transitions.size(); ++i) {
    differs = a.transitions[i].state != c.transitions[i].state ||
              a.transitions[i].action != c.transitions[i].action;
  }
  CHECK(differs);
}

TEST_CASE("didactic dataset covers every room and hallway state") {
  const GridWorld& gw = didactic_world();
  const OfflineDataset& ds = didactic_dataset();
  const EmpiricalModel model = estimate_model(ds, gw.mdp.n_states, gw.mdp.n_actions, 1e-4);
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (s == gw.goal_state) continue;  // the goal only appears as a next state
    CHECK(model.mu_hat[s] > 0.0);
  }
  // Hallways only ever log the toward action.
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    const Cell c = gw.state_to_cell[s];
    if (gw.spec.region_at(c.x, c.y) != Region::Hallway) continue;
    for (int a = 0; a < gw.mdp.n_actions; ++a) {
      CHECK(model.in_support(s, a) == (a == toward_goal_action(gw, s)));
    }
  }
}

TEST_CASE("dataset JSONL round-trips and saves deterministically") {
  namespace fs = std::filesystem;
  DatasetMeta meta;
  meta.n_trajectories = 10;
  meta.horizon = 30;
  const OfflineDataset ds = generate_dataset(meta);
  const fs::path dir = fs::temp_directory_path() / "rlab_test_dataset";
  fs::create_directories(dir);
  const std::string p1 = (dir / "a.jsonl").string(), p2 = (dir / "b.jsonl").string();
  save_dataset(ds, p1);
  save_dataset(ds, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  const OfflineDataset back = load_dataset(p1);
  CHECK(back.meta == ds.meta);
  REQUIRE(back.transitions.size() == ds.transitions.size());
  for (std::size_t i = 0; i < ds.transitions.size(); ++i) {
    CHECK(back.transitions[i].state == ds.transitions[i].state);
    CHECK(back.transitions[i].reward == ds.transitions[i].reward);
  }
}

TEST_CASE("estimate_model counts, floors and renormalizes") {
  OfflineDataset ds;
  // State 0 seen 10 times: action 0 seven times, action 1 three times.
  for (int i = 0; i < 7; ++i) ds.transitions.push_back({0, 0, 0.0, 1, false});
  for (int i = 0; i < 3; ++i) ds.transitions.push_back({0, 1, 1.0, 0, false});
  const EmpiricalModel m = estimate_model(ds, 3, 4, 1e-4);
  CHECK(m.pi_beta_hat.probs(0, 0) == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(m.pi_beta_hat.probs(0, 1) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(m.pi_beta_hat.probs(0, 2) == doctest::Approx(1e-4).epsilon(1e-2));
  // Unseen state: uniform row, no support.
  for (int a = 0; a < 4; ++a) {
    CHECK(m.pi_beta_hat.probs(2, a) == doctest::Approx(0.25));
    CHECK_FALSE(m.in_support(2, a));
  }
  CHECK(m.in_support(0, 0));
  CHECK_FALSE(m.in_support(0, 2));
  // Observed pair (0,0) always went to state 1.
  CHECK(m.next_dist(0, 0)[1] == doctest::Approx(1.0));
  CHECK(m.empirical_reward(0, 1) == doctest::Approx(1.0));
  CHECK(m.mu_hat[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_model(OfflineDataset{}, 3, 4, 1e-4), RlabError);
}

TEST_CASE("flooring preserves normalization on every row") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const EmpiricalModel m = testutil::random_partial_support_model(rng, 6, 4, 0.5);
    for (int s = 0; s < 6; ++s) {
      double sum = 0.0;
      for (int a = 0; a < 4; ++a) sum += m.pi_beta_hat.probs(s, a);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("behavior policy estimate converges at 1e5 samples") {
  // Law-of-large-numbers fixture, frozen seed. Known policy on a small MDP.
  Rng rng(2024);
  const int n_states = 5, n_actions = 3;
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = 0.9;
  m.transition.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  m.reward = StateActionTable(n_states, n_actions, 0.0);
  m.initial_dist.assign(n_states, 1.0 / n_states);
  m.terminal.assign(n_states, 0);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const std::vector<double> row = testutil::random_simplex(rng, n_states);
      std::copy(row.begin(), row.end(), m.next_dist_mut(s, a).begin());
    }
  }
  m.validate();
  const TabularPolicy truth = testutil::random_policy(rng, n_states, n_actions);

  OfflineDataset ds;
  const int n_traj = 5000, horizon = 20;
  for (int k = 0; k < n_traj; ++k) {
    const Trajectory t = rollout(m, truth, horizon, derive_seed(42, k));
    ds.transitions.insert(ds.transitions.end(), t.begin(), t.end());
  }
  REQUIRE(ds.transitions.size() == 100000);
  const EmpiricalModel est = estimate_model(ds, n_states, n_actions, 1e-4);
  double err = 0.0;
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      err = std::max(err, std::abs(est.pi_beta_hat.probs(s, a) - truth.probs(s, a)));
    }
  }
  CHECK(err <= 0.02);
}

TEST_CASE("empirical MDP reproduces observed dynamics and self-loops elsewhere") {
  const TabularMdp base = testutil::chain_mdp({{1, 2}, {2, 0}, {2, 2}},
                                              {{0, 0}, {1, 0}, {0, 0}}, 0.9, {2});
  OfflineDataset ds;
  ds.transitions.push_back({0, 0, 0.0, 1, false});  // (0,0) observed once -> 1
  ds.transitions.push_back({1, 0, 1.0, 2, true});
  const EmpiricalModel m = estimate_model(ds, 3, 2, 1e-4);
  const TabularMdp emp = empirical_mdp(m, base);
  CHECK(emp.next_dist(0, 0)[1] == 1.0);             // one-hot at the observation
  CHECK(emp.next_dist(0, 1)[0] == 1.0);             // unobserved pair self-loops
  CHECK(emp.reward(0, 1) == 0.0);
  CHECK(emp.next_dist(1, 0)[2] == 1.0);
  CHECK(emp.reward(1, 0) == 1.0);

  // A fully covered deterministic MDP reproduces the true tensor.
  OfflineDataset full;
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      int next = 0;
      for (int s2 = 0; s2 < 3; ++s2) {
        if (base.next_dist(s, a)[s2] == 1.0) next = s2;
      }
      full.transitions.push_back({s, a, base.reward(s, a), next, next == 2});
    }
  }
  const TabularMdp emp_full = empirical_mdp(estimate_model(full, 3, 2, 1e-4), base);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int s2 = 0; s2 < 3; ++s2) {
        CHECK(emp_full.next_dist(s, a)[s2] == base.next_dist(s, a)[s2]);
      }
    }
  }
}
