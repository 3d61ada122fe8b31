#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlab/behavior.hpp"
#include "rlab/mdp.hpp"

namespace rlab {

// Everything needed to regenerate a dataset bit-exactly.
struct DatasetMeta {
  std::string layout = kDidacticLayoutName;  // built-in name or map file path
  BehaviorSpec behavior;
  int n_trajectories = 1000;
  int horizon = 400;
  std::uint64_t seed = 7;
  double gamma = 0.99;

  bool operator==(const DatasetMeta&) const = default;
};

struct OfflineDataset {
  DatasetMeta meta;
  std::vector<Transition> transitions;
};

// Rolls out n_trajectories episodes of the behavior policy. Episode k uses
// the derived seed (meta.seed, k) and starts from a uniformly drawn
// non-terminal state, which approximates the even state coverage the
// construction calls for; single-start rollouts would pool at the biased
// walls and never cover later rooms.
OfflineDataset collect_dataset(const TabularMdp& mdp, const TabularPolicy& behavior,
                               const DatasetMeta& meta);

// Convenience: build the world + behavior from metadata and collect.
OfflineDataset generate_dataset(const DatasetMeta& meta);
GridWorld world_from_meta(const DatasetMeta& meta);

// JSON-lines file format: the first line is a metadata header object, then
// one object per transition with integer fields {"s","a","r","s2","done"}.
void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

// Count-based estimates of the behavior policy, state density and dynamics.
struct EmpiricalModel {
  TabularPolicy pi_beta_hat;          // floored at eps_b and renormalized
  std::vector<double> mu_hat;         // state visit frequencies, sums to 1
  std::vector<std::uint32_t> counts;  // [s * n_actions + a]
  std::vector<std::uint32_t> state_counts;  // sum over actions
  std::vector<double> empirical_transition;  // [s][a][s2]
  StateActionTable empirical_reward;
  std::vector<std::uint8_t> support;  // support_mask: count(s,a) > 0
  double eps_b = 1e-4;
  int n_states = 0;
  int n_actions = 0;

  std::uint32_t count(int s, int a) const {
    return counts[static_cast<std::size_t>(s) * n_actions + a];
  }
  // Unfloored conditional count(s,a)/count(s). This is what the trainers
  // divide by on the support: the logged behavior then carries exactly zero
  // penalty, which the floored row cannot do once it is renormalized.
  double raw_conditional(int s, int a) const {
    const std::uint32_t total = state_counts[s];
    if (total == 0) return 1.0 / n_actions;
    return static_cast<double>(count(s, a)) / total;
  }
  bool in_support(int s, int a) const {
    return support[static_cast<std::size_t>(s) * n_actions + a] != 0;
  }
  std::span<const double> next_dist(int s, int a) const {
    return {empirical_transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }
};

// pi_beta_hat(a|s) = count(s,a)/count(s) for observed s, floored at eps_b and
// renormalized. Unobserved states get uniform rows with an all-false support
// mask. Unobserved (s,a) pairs self-loop with reward 0 in the empirical
// dynamics. Throws on an empty dataset.
EmpiricalModel estimate_model(const OfflineDataset& ds, int n_states, int n_actions, double eps_b);

// The MDP induced by the count-based estimates. Unobserved pairs self-loop
// with reward 0, so their values are driven only by the conservatism term.
TabularMdp empirical_mdp(const EmpiricalModel& model, const TabularMdp& mdp);

}  // namespace rlab
