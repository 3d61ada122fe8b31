#include "rlab/mdp.hpp"

#include <cmath>
#include <numeric>

namespace rlab {

namespace {
bool is_prob_vector(std::span<const double> v, double tol) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}
}  // namespace

void TabularPolicy::validate(double tol) const {
  for (int s = 0; s < n_states(); ++s) {
    detail::check(is_prob_vector(probs.row(s), tol),
                  "policy row " + std::to_string(s) + " is not a probability vector");
  }
}

void TabularMdp::validate(double tol) const {
  detail::check(n_states > 0 && n_actions > 0, "empty MDP");
  detail::check(gamma > 0.0 && gamma < 1.0, "discount must lie in (0, 1)");
  detail::check(static_cast<int>(terminal.size()) == n_states, "terminal mask size mismatch");
  detail::check(is_prob_vector(initial_dist, tol), "initial distribution is not stochastic");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      detail::check(is_prob_vector(next_dist(s, a), tol),
                    "transition row (" + std::to_string(s) + "," + std::to_string(a) +
                        ") is not stochastic");
      detail::check(std::isfinite(reward(s, a)), "non-finite reward");
    }
    if (is_terminal(s)) {
      for (int a = 0; a < n_actions; ++a) {
        detail::check(next_dist(s, a)[s] == 1.0, "terminal state must self-loop");
        detail::check(reward(s, a) == 0.0, "terminal state must have zero reward");
      }
    }
  }
}

void validate_chaining(const Trajectory& traj, int horizon) {
  detail::check(static_cast<int>(traj.size()) <= horizon, "trajectory longer than horizon");
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    detail::check(!traj[i].done, "transition after episode end");
    detail::check(traj[i].next_state == traj[i + 1].state, "trajectory does not chain");
  }
}

}  // namespace rlab
