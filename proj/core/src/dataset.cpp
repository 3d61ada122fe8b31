#include "rlab/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "rlab/dp.hpp"
#include "rlab/rng.hpp"

namespace rlab {

GridWorld world_from_meta(const DatasetMeta& meta) {
  GridSpec spec;
  if (meta.layout == kDidacticLayoutName) {
    spec = builtin_layout(meta.layout);
  } else {
    spec = GridSpec::load(meta.layout);
  }
  return build_gridworld(spec, meta.gamma);
}

OfflineDataset collect_dataset(const TabularMdp& m, const TabularPolicy& behavior,
                               const DatasetMeta& meta) {
  detail::check(meta.n_trajectories >= 1, "n_trajectories must be >= 1");
  detail::check(meta.horizon >= 1, "horizon must be >= 1");
  std::vector<int> free_states;
  free_states.reserve(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    if (!m.is_terminal(s)) free_states.push_back(s);
  }
  OfflineDataset ds;
  ds.meta = meta;
  for (int k = 0; k < meta.n_trajectories; ++k) {
    const std::uint64_t traj_seed = derive_seed(meta.seed, static_cast<std::uint64_t>(k));
    Rng start_rng(derive_seed(traj_seed, 0x5741u));
    const int start = free_states[start_rng.next_below(static_cast<int>(free_states.size()))];
    const Trajectory traj = rollout(m, behavior, meta.horizon, traj_seed, start);
    ds.transitions.insert(ds.transitions.end(), traj.begin(), traj.end());
  }
  return ds;
}

// The shipped datasets are logged by the two mixture components separately:
// episode k rolls the biased component with probability w_biased and the
// exploratory (uniform-room) component otherwise, both keeping the hallway
// rule. The per-state action mixture equals make_behavior_policy's output,
// while the exploratory episodes supply the even state coverage that a
// single drifting policy cannot (it pools at the biased walls and never
// demonstrates the approach to the goal).
OfflineDataset generate_dataset(const DatasetMeta& meta) {
  const GridWorld world = world_from_meta(meta);
  meta.behavior.validate();
  BehaviorSpec explore = meta.behavior;
  explore.w_uniform = 1.0;
  explore.w_biased = 0.0;
  BehaviorSpec directed = meta.behavior;
  directed.w_uniform = 0.0;
  directed.w_biased = 1.0;
  const TabularPolicy explore_pi = make_behavior_policy(world, explore);
  const TabularPolicy directed_pi = make_behavior_policy(world, directed);

  const TabularMdp& m = world.mdp;
  std::vector<int> free_states;
  for (int s = 0; s < m.n_states; ++s) {
    if (!m.is_terminal(s)) free_states.push_back(s);
  }
  OfflineDataset ds;
  ds.meta = meta;
  for (int k = 0; k < meta.n_trajectories; ++k) {
    const std::uint64_t traj_seed = derive_seed(meta.seed, static_cast<std::uint64_t>(k));
    Rng start_rng(derive_seed(traj_seed, 0x5741u));
    Rng component_rng(derive_seed(traj_seed, 0x6d69u));
    const int start = free_states[start_rng.next_below(static_cast<int>(free_states.size()))];
    const bool biased = component_rng.next_double() < meta.behavior.w_biased;
    const Trajectory traj =
        rollout(m, biased ? directed_pi : explore_pi, meta.horizon, traj_seed, start);
    ds.transitions.insert(ds.transitions.end(), traj.begin(), traj.end());
  }
  return ds;
}

namespace {

nlohmann::ordered_json meta_to_json(const DatasetMeta& meta) {
  nlohmann::ordered_json j;
  j["layout"] = meta.layout;
  j["variant"] = to_string(meta.behavior.variant);
  j["w_uniform"] = meta.behavior.w_uniform;
  j["w_biased"] = meta.behavior.w_biased;
  j["bias_strength"] = meta.behavior.bias_strength;
  j["hallway_noise"] = meta.behavior.hallway_noise;
  j["room_noise"] = meta.behavior.room_noise;
  j["n_trajectories"] = meta.n_trajectories;
  j["horizon"] = meta.horizon;
  j["seed"] = meta.seed;
  j["gamma"] = meta.gamma;
  return j;
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
  DatasetMeta meta;
  meta.layout = j.at("layout").get<std::string>();
  meta.behavior.variant = behavior_variant_from_string(j.at("variant").get<std::string>());
  meta.behavior.w_uniform = j.at("w_uniform").get<double>();
  meta.behavior.w_biased = j.at("w_biased").get<double>();
  meta.behavior.bias_strength = j.at("bias_strength").get<double>();
  meta.behavior.hallway_noise = j.at("hallway_noise").get<double>();
  meta.behavior.room_noise = j.at("room_noise").get<std::vector<double>>();
  meta.n_trajectories = j.at("n_trajectories").get<int>();
  meta.horizon = j.at("horizon").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.gamma = j.at("gamma").get<double>();
  return meta;
}

}  // namespace

void save_dataset(const OfflineDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << meta_to_json(ds.meta).dump() << "\n";
  char line[96];
  for (const Transition& t : ds.transitions) {
    std::snprintf(line, sizeof(line), "{\"s\":%d,\"a\":%d,\"r\":%d,\"s2\":%d,\"done\":%d}\n",
                  t.state, t.action, static_cast<int>(t.reward), t.next_state, t.done ? 1 : 0);
    out << line;
  }
  if (!out) throw RlabError("write failed: " + path);
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RlabError("cannot open dataset: " + path);
  std::string line;
  detail::check(static_cast<bool>(std::getline(in, line)), "dataset missing header line");
  OfflineDataset ds;
  ds.meta = meta_from_json(nlohmann::json::parse(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    Transition t;
    t.state = j.at("s").get<int>();
    t.action = j.at("a").get<int>();
    t.reward = j.at("r").get<int>();
    t.next_state = j.at("s2").get<int>();
    t.done = j.at("done").get<int>() != 0;
    ds.transitions.push_back(t);
  }
  return ds;
}

EmpiricalModel estimate_model(const OfflineDataset& ds, int n_states, int n_actions,
                              double eps_b) {
  detail::check(!ds.transitions.empty(), "empty dataset");
  detail::check(eps_b > 0.0 && eps_b <= 1e-2, "eps_b must lie in (0, 1e-2]");
  EmpiricalModel em;
  em.eps_b = eps_b;
  em.n_states = n_states;
  em.n_actions = n_actions;
  em.counts.assign(static_cast<std::size_t>(n_states) * n_actions, 0);
  em.state_counts.assign(n_states, 0);
  em.support.assign(static_cast<std::size_t>(n_states) * n_actions, 0);
  em.empirical_transition.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  em.empirical_reward = StateActionTable(n_states, n_actions, 0.0);
  em.mu_hat.assign(n_states, 0.0);

  for (const Transition& t : ds.transitions) {
    detail::check(t.state >= 0 && t.state < n_states && t.next_state >= 0 &&
                      t.next_state < n_states && t.action >= 0 && t.action < n_actions,
                  "transition index out of range");
    const std::size_t sa = static_cast<std::size_t>(t.state) * n_actions + t.action;
    em.counts[sa] += 1;
    em.state_counts[t.state] += 1;
    em.support[sa] = 1;
    em.empirical_transition[sa * n_states + t.next_state] += 1.0;
    em.empirical_reward(t.state, t.action) += t.reward;
    em.mu_hat[t.state] += 1.0;
  }

  const double total = static_cast<double>(ds.transitions.size());
  for (double& x : em.mu_hat) x /= total;

  em.pi_beta_hat = TabularPolicy::uniform(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    double state_count = 0.0;
    for (int a = 0; a < n_actions; ++a) state_count += em.count(s, a);
    for (int a = 0; a < n_actions; ++a) {
      const std::size_t sa = static_cast<std::size_t>(s) * n_actions + a;
      const double c = em.counts[sa];
      if (c > 0) {
        for (int s2 = 0; s2 < n_states; ++s2) em.empirical_transition[sa * n_states + s2] /= c;
        em.empirical_reward(s, a) /= c;
      } else {
        em.empirical_transition[sa * n_states + s] = 1.0;
      }
    }
    if (state_count == 0.0) continue;  // unobserved: uniform row, no support
    double norm = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      const double raw = em.count(s, a) / state_count;
      const double floored = std::max(raw, eps_b);
      em.pi_beta_hat.probs(s, a) = floored;
      norm += floored;
    }
    for (int a = 0; a < n_actions; ++a) em.pi_beta_hat.probs(s, a) /= norm;
  }
  em.pi_beta_hat.validate();
  return em;
}

TabularMdp empirical_mdp(const EmpiricalModel& model, const TabularMdp& mdp) {
  detail::check(model.n_states == mdp.n_states && model.n_actions == mdp.n_actions,
                "model/mdp shape mismatch");
  TabularMdp m = mdp;
  m.transition = model.empirical_transition;
  m.reward = model.empirical_reward;
  // Terminal convention is inherited; observed transitions never leave a
  // terminal state, so terminal rows stay self-loops with zero reward.
  for (int s = 0; s < m.n_states; ++s) {
    if (!m.is_terminal(s)) continue;
    for (int a = 0; a < m.n_actions; ++a) {
      auto row = m.next_dist_mut(s, a);
      std::fill(row.begin(), row.end(), 0.0);
      row[s] = 1.0;
      m.reward(s, a) = 0.0;
    }
  }
  m.validate();
  return m;
}

}  // namespace rlab
