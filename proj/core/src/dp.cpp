#include "rlab/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/rng.hpp"

namespace rlab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

QTable q_from_v(const TabularMdp& mdp, const ValueTable& v) {
  QTable q(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      q(s, a) = mdp.reward(s, a) + mdp.gamma * dot(mdp.next_dist(s, a), v);
    }
  }
  return q;
}

constexpr int kMaxSweeps = 1000000;

}  // namespace

Evaluation policy_evaluation(const TabularMdp& mdp, const TabularPolicy& policy, double tol) {
  detail::check(tol > 0.0, "tol must be positive");
  ValueTable v(mdp.n_states, 0.0);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double residual = 0.0;
    ValueTable next(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
      double vs = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double pa = policy.probs(s, a);
        if (pa == 0.0) continue;
        vs += pa * (mdp.reward(s, a) + mdp.gamma * dot(mdp.next_dist(s, a), v));
      }
      next[s] = vs;
      residual = std::max(residual, std::abs(vs - v[s]));
    }
    v = std::move(next);
    if (residual <= tol) break;
  }
  Evaluation out;
  out.q = q_from_v(mdp, v);
  out.v.assign(mdp.n_states, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) out.v[s] = dot(policy.probs.row(s), out.q.row(s));
  return out;
}

double policy_return(const TabularMdp& mdp, const TabularPolicy& policy, double tol) {
  const Evaluation ev = policy_evaluation(mdp, policy, tol);
  return dot(mdp.initial_dist, ev.v);
}

ValueTable value_iteration(const TabularMdp& mdp, double tol) {
  detail::check(tol > 0.0, "tol must be positive");
  ValueTable v(mdp.n_states, 0.0);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.n_actions; ++a) {
        best = std::max(best, mdp.reward(s, a) + mdp.gamma * dot(mdp.next_dist(s, a), v));
      }
      residual = std::max(residual, std::abs(best - v[s]));
      v[s] = best;
    }
    if (residual <= tol) break;
  }
  return v;
}

TabularPolicy greedy_policy(const TabularMdp& mdp, const ValueTable& v) {
  TabularPolicy pi{StateActionTable(mdp.n_states, mdp.n_actions, 0.0)};
  for (int s = 0; s < mdp.n_states; ++s) {
    int best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double q = mdp.reward(s, a) + mdp.gamma * dot(mdp.next_dist(s, a), v);
      if (q > best_q + 1e-12) {
        best_q = q;
        best = a;
      }
    }
    pi.probs(s, best) = 1.0;
  }
  return pi;
}

std::vector<double> occupancy(const TabularMdp& mdp, const TabularPolicy& policy, double tol) {
  detail::check(tol > 0.0, "tol must be positive");
  std::vector<double> d = mdp.initial_dist;
  for (double& x : d) x *= (1.0 - mdp.gamma);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    std::vector<double> next(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) next[s] = (1.0 - mdp.gamma) * mdp.initial_dist[s];
    for (int s = 0; s < mdp.n_states; ++s) {
      if (d[s] == 0.0) continue;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double w = d[s] * policy.probs(s, a) * mdp.gamma;
        if (w == 0.0) continue;
        const auto t = mdp.next_dist(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          if (t[s2] != 0.0) next[s2] += w * t[s2];
        }
      }
    }
    double delta = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) delta += std::abs(next[s] - d[s]);
    d = std::move(next);
    if (delta <= tol) break;
  }
  double total = 0.0;
  for (double x : d) total += x;
  for (double& x : d) x /= total;
  return d;
}

double evaluate_success_rate(const TabularMdp& mdp, const TabularPolicy& policy, int episodes,
                             int horizon, std::uint64_t seed) {
  detail::check(episodes >= 1, "episodes must be >= 1");
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    const Trajectory traj = rollout(mdp, policy, horizon, derive_seed(seed, e));
    if (!traj.empty() && traj.back().done) ++wins;
  }
  return static_cast<double>(wins) / episodes;
}

Trajectory rollout(const TabularMdp& mdp, const TabularPolicy& policy, int horizon,
                   std::uint64_t seed, int start_state) {
  detail::check(horizon >= 1, "horizon must be >= 1");
  Rng rng(seed);
  int s = start_state >= 0 ? start_state : rng.sample(mdp.initial_dist);
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    if (mdp.is_terminal(s)) break;
    const int a = rng.sample(policy.probs.row(s));
    const int s2 = rng.sample(mdp.next_dist(s, a));
    const bool done = mdp.is_terminal(s2);
    traj.push_back({s, a, mdp.reward(s, a), s2, done});
    if (done) break;
    s = s2;
  }
  return traj;
}

}  // namespace rlab
