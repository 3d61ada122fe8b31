#pragma once

#include <cstdint>

#include "rlab/mdp.hpp"

namespace rlab {

struct Evaluation {
  ValueTable v;
  QTable q;
};

// Iterative Bellman evaluation of a fixed policy. Stops once the sup-norm
// Bellman residual is <= tol. The returned V is recomputed from Q so that
// V(s) = sum_a pi(a|s) Q(s,a) holds exactly.
Evaluation policy_evaluation(const TabularMdp& mdp, const TabularPolicy& policy, double tol);

// Expected discounted return from the initial distribution:
// sum_s mu0(s) V^pi(s). Note this is E[sum gamma^t r_t] without any
// 1/(1-gamma) normalization; see README for the convention.
double policy_return(const TabularMdp& mdp, const TabularPolicy& policy, double tol);

// Exact value iteration; greedy_policy breaks ties at the lowest action index.
ValueTable value_iteration(const TabularMdp& mdp, double tol);
TabularPolicy greedy_policy(const TabularMdp& mdp, const ValueTable& v);

// Discounted state occupancy d^pi(s) = (1-gamma) sum_t gamma^t P(s_t = s),
// computed by fixed-point iteration and normalized to sum exactly 1.
std::vector<double> occupancy(const TabularMdp& mdp, const TabularPolicy& policy, double tol);

// Seeded episodic sampling. The episode ends on entering a terminal state or
// after `horizon` steps. If start_state >= 0 it overrides the initial
// distribution. Identical inputs yield identical trajectories.
Trajectory rollout(const TabularMdp& mdp, const TabularPolicy& policy, int horizon,
                   std::uint64_t seed, int start_state = -1);

// Fraction of `episodes` rollouts that enter a terminal state within the
// horizon. Episode k uses the derived seed (seed, k).
double evaluate_success_rate(const TabularMdp& mdp, const TabularPolicy& policy, int episodes,
                             int horizon, std::uint64_t seed);

}  // namespace rlab
