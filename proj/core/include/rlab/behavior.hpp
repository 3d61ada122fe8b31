#pragma once

#include <string>
#include <vector>

#include "rlab/grid.hpp"

namespace rlab {

enum class BehaviorVariant { Didactic, Noisy, Biased, Homogeneous };

std::string to_string(BehaviorVariant v);
BehaviorVariant behavior_variant_from_string(const std::string& s);

// How the logged behavior acts in each region of the maze.
//
// Hallways: probability (1 - hallway_noise) on the action that moves toward
// the goal, the rest spread uniformly over the other actions.
//
// Rooms: a per-action mixture of two policies,
//   w_uniform * Uniform(A) + w_biased * B,
// where B puts bias_strength on the room's away-from-goal action and spreads
// the remainder uniformly. The defaults realize an away-action mass of 0.8
// with the leftover 0.2 split evenly (0.05 per action for 5 actions).
//
// The away direction of a room is the single move that, summed over the
// room's cells, increases BFS distance to the goal the most (ties broken at
// the lowest action index). The homogeneous variant is the homoskedastic
// control: the uniform action distribution at every free cell.
struct BehaviorSpec {
  BehaviorVariant variant = BehaviorVariant::Didactic;
  double w_uniform = 0.25;
  double w_biased = 0.75;
  double bias_strength = 1.0;
  double hallway_noise = 0.0;
  // Noisy variant: extra uniform mixing per room, cycled by room index.
  std::vector<double> room_noise = {0.1, 0.4, 0.7};

  bool operator==(const BehaviorSpec&) const = default;
  void validate() const;
};

// Builds the per-state behavior distribution for a gridworld.
// Throws if the grid leaves any free cell without a region label.
TabularPolicy make_behavior_policy(const GridWorld& world, const BehaviorSpec& spec);

// The action a hallway cell's rule drives toward (argmin BFS goal distance,
// ties at the lowest action index). Exposed for tests and diagnostics.
int toward_goal_action(const GridWorld& world, int state);
int away_from_goal_action_per_cell(const GridWorld& world, int state);
std::vector<int> room_away_actions(const GridWorld& world);

}  // namespace rlab
