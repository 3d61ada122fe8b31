#include "rlab/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlab {

std::string to_string(BehaviorVariant v) {
  switch (v) {
    case BehaviorVariant::Didactic: return "didactic";
    case BehaviorVariant::Noisy: return "noisy";
    case BehaviorVariant::Biased: return "biased";
    case BehaviorVariant::Homogeneous: return "homogeneous";
  }
  throw RlabError("bad variant");
}

BehaviorVariant behavior_variant_from_string(const std::string& s) {
  if (s == "didactic") return BehaviorVariant::Didactic;
  if (s == "noisy") return BehaviorVariant::Noisy;
  if (s == "biased") return BehaviorVariant::Biased;
  if (s == "homogeneous") return BehaviorVariant::Homogeneous;
  throw RlabError("unknown behavior variant: " + s);
}

void BehaviorSpec::validate() const {
  detail::check(std::abs(w_uniform + w_biased - 1.0) <= 1e-12, "mixture weights must sum to 1");
  detail::check(w_uniform >= 0.0 && w_biased >= 0.0, "mixture weights must be non-negative");
  detail::check(bias_strength >= 0.0 && bias_strength <= 1.0, "bias_strength must lie in [0,1]");
  detail::check(hallway_noise >= 0.0 && hallway_noise <= 1.0, "hallway_noise must lie in [0,1]");
  for (double e : room_noise) detail::check(e >= 0.0 && e <= 1.0, "room noise must lie in [0,1]");
}

namespace {

// Distance change of a move, with wall bumps staying in place.
int moved_distance(const GridWorld& world, const std::vector<int>& dist, int state, int a) {
  const Cell c = world.state_to_cell[state];
  const int nx = c.x + kActionDelta[a][0], ny = c.y + kActionDelta[a][1];
  if (!world.spec.in_bounds(nx, ny) || world.spec.is_wall(nx, ny)) return dist[state];
  return dist[world.state_at(nx, ny)];
}

std::vector<double> room_distribution(int away, const BehaviorSpec& spec, int n_actions) {
  std::vector<double> p(n_actions, 0.0);
  const double u = 1.0 / n_actions;
  for (int a = 0; a < n_actions; ++a) {
    double biased = (a == away) ? spec.bias_strength : 0.0;
    biased += (1.0 - spec.bias_strength) * u;
    p[a] = spec.w_uniform * u + spec.w_biased * biased;
  }
  return p;
}

std::vector<double> hallway_distribution(int toward, double noise, int n_actions) {
  std::vector<double> p(n_actions, noise / (n_actions - 1));
  p[toward] = 1.0 - noise;
  return p;
}

void mix_uniform(std::vector<double>& p, double eps) {
  const double u = 1.0 / static_cast<double>(p.size());
  for (double& x : p) x = (1.0 - eps) * x + eps * u;
}

}  // namespace

int toward_goal_action(const GridWorld& world, int state) {
  const std::vector<int> dist = world.goal_distance();
  int best = 0, best_d = moved_distance(world, dist, state, 0);
  for (int a = 1; a < 4; ++a) {
    const int d = moved_distance(world, dist, state, a);
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

int away_from_goal_action_per_cell(const GridWorld& world, int state) {
  const std::vector<int> dist = world.goal_distance();
  int best = 0, best_d = moved_distance(world, dist, state, 0);
  for (int a = 1; a < 4; ++a) {
    const int d = moved_distance(world, dist, state, a);
    if (d > best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

std::vector<int> room_away_actions(const GridWorld& world) {
  int n_rooms = 0;
  const std::vector<int> room_id = world.room_components(&n_rooms);
  const std::vector<int> dist = world.goal_distance();
  std::vector<int> away(n_rooms, 0);
  for (int r = 0; r < n_rooms; ++r) {
    long best_sum = std::numeric_limits<long>::min();
    int best = 0;
    for (int a = 0; a < 4; ++a) {
      long sum = 0;
      for (int s = 0; s < world.mdp.n_states; ++s) {
        if (room_id[s] != r) continue;
        sum += moved_distance(world, dist, s, a) - dist[s];
      }
      if (sum > best_sum) {
        best_sum = sum;
        best = a;
      }
    }
    away[r] = best;
  }
  return away;
}

TabularPolicy make_behavior_policy(const GridWorld& world, const BehaviorSpec& spec) {
  spec.validate();
  const TabularMdp& m = world.mdp;
  const std::vector<int> dist = world.goal_distance();
  int n_rooms = 0;
  const std::vector<int> room_id = world.room_components(&n_rooms);
  const std::vector<int> away = room_away_actions(world);

  TabularPolicy pi{StateActionTable(m.n_states, m.n_actions, 0.0)};
  for (int s = 0; s < m.n_states; ++s) {
    const Cell c = world.state_to_cell[s];
    std::vector<double> p;
    if (spec.variant == BehaviorVariant::Homogeneous) {
      // The homoskedastic control: one and the same action distribution at
      // every free cell, with no directional bias anywhere.
      p.assign(m.n_actions, 1.0 / m.n_actions);
    } else if (world.spec.region_at(c.x, c.y) == Region::Hallway) {
      p = hallway_distribution(toward_goal_action(world, s), spec.hallway_noise, m.n_actions);
    } else {
      const int r = room_id[s];
      detail::check(r >= 0, "free cell without region label");
      int dir = away[r];
      if (spec.variant == BehaviorVariant::Biased && (r % 2 == 1)) {
        // Alternate rooms flip the bias sign: drive toward the goal instead.
        dir = (dir % 2 == 0) ? dir + 1 : dir - 1;
      }
      p = room_distribution(dir, spec, m.n_actions);
      if (spec.variant == BehaviorVariant::Noisy && !spec.room_noise.empty()) {
        mix_uniform(p, spec.room_noise[r % spec.room_noise.size()]);
      }
    }
    std::copy(p.begin(), p.end(), pi.probs.row(s).begin());
  }
  pi.validate();
  return pi;
}

}  // namespace rlab
