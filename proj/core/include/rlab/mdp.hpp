#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlab {

struct RlabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense [n_states] x [n_actions] table of doubles, row-major.
class StateActionTable {
 public:
  StateActionTable() = default;
  StateActionTable(int n_states, int n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions),
        data_(static_cast<std::size_t>(n_states) * n_actions, fill) {}

  double& operator()(int s, int a) { return data_[static_cast<std::size_t>(s) * n_actions_ + a]; }
  double operator()(int s, int a) const { return data_[static_cast<std::size_t>(s) * n_actions_ + a]; }

  std::span<double> row(int s) { return {data_.data() + static_cast<std::size_t>(s) * n_actions_, static_cast<std::size_t>(n_actions_)}; }
  std::span<const double> row(int s) const { return {data_.data() + static_cast<std::size_t>(s) * n_actions_, static_cast<std::size_t>(n_actions_)}; }

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> data_;
};

using QTable = StateActionTable;
using ValueTable = std::vector<double>;

// Per-state categorical distribution over actions.
struct TabularPolicy {
  StateActionTable probs;

  int n_states() const { return probs.n_states(); }
  int n_actions() const { return probs.n_actions(); }

  static TabularPolicy uniform(int n_states, int n_actions) {
    TabularPolicy p{StateActionTable(n_states, n_actions, 1.0 / n_actions)};
    return p;
  }
  // Throws if any row is not a probability vector within tol.
  void validate(double tol = 1e-9) const;
};

// Finite MDP with a dense transition tensor.
// transition(s, a) is a categorical over next states; rows sum to 1.
// Terminal states self-loop with reward 0.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s2], row-major
  StateActionTable reward;         // r(s, a)
  std::vector<double> initial_dist;
  double gamma = 0.99;
  std::vector<std::uint8_t> terminal;

  std::span<const double> next_dist(int s, int a) const {
    return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }
  std::span<double> next_dist_mut(int s, int a) {
    return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }
  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }

  // Checks stochasticity of every transition row, the initial distribution,
  // and the terminal self-loop convention. Throws RlabError on violation.
  void validate(double tol = 1e-9) const;
};

struct Transition {
  int state;
  int action;
  double reward;
  int next_state;
  bool done;
};

// Episode fragment; consecutive records chain unless an episode ended.
using Trajectory = std::vector<Transition>;

void validate_chaining(const Trajectory& traj, int horizon);

inline double value_cap(double gamma) { return 2.0 / (1.0 - gamma); }

namespace detail {
inline void check(bool ok, const std::string& msg) {
  if (!ok) throw RlabError(msg);
}
}  // namespace detail

}  // namespace rlab
