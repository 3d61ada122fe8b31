#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rlab/mdp.hpp"

namespace rlab {

// Five grid actions, in this fixed order everywhere.
enum class Action : int { Left = 0, Right = 1, Up = 2, Down = 3, NoOp = 4 };
inline constexpr int kNumActions = 5;
inline constexpr std::array<std::array<int, 2>, kNumActions> kActionDelta = {{
    {-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}}};

enum class Region : std::uint8_t { Hallway, Room };

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// Parsed maze geometry. ASCII map format, one row per line, top row first:
//   '#' wall, '.' free room cell, 'H' free hallway cell,
//   'S' start (room cell), 'G' goal (room cell).
struct GridSpec {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> wall;   // [y * width + x]
  std::vector<Region> region;      // defined for non-wall cells
  Cell start;
  Cell goal;

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool is_wall(int x, int y) const { return wall[static_cast<std::size_t>(y) * width + x] != 0; }
  Region region_at(int x, int y) const { return region[static_cast<std::size_t>(y) * width + x]; }

  // Throws RlabError if the invariants do not hold: start/goal free and
  // in-bounds, no isolated free cell, goal reachable from start.
  void validate() const;

  static GridSpec parse(const std::string& ascii_map);
  static GridSpec load(const std::string& path);
  std::string to_ascii() const;
};

// The built-in 24x16 layout: three wide rooms joined by one-cell-wide
// hallways, start in the top room, goal in the bottom room.
extern const char kDidacticLayoutName[];
const std::string& didactic_layout_ascii();
GridSpec builtin_layout(const std::string& name);  // throws on unknown name

// Gridworld MDP plus the geometry needed to map states back to cells.
// State indexing is row-major over non-wall cells: scanning y = 0..H-1,
// x = 0..W-1, each free cell is assigned the next state id.
struct GridWorld {
  GridSpec spec;
  TabularMdp mdp;
  std::vector<int> cell_to_state;  // [y * width + x], -1 for walls
  std::vector<Cell> state_to_cell;
  int start_state = 0;
  int goal_state = 0;

  int state_at(int x, int y) const { return cell_to_state[static_cast<std::size_t>(y) * spec.width + x]; }

  // BFS distance to the goal over free cells (4-neighborhood).
  std::vector<int> goal_distance() const;
  // Connected components of room cells, indexed from 0 in state order.
  // room_id[s] = -1 for hallway states.
  std::vector<int> room_components(int* n_rooms) const;
};

// Deterministic dynamics: moves into walls or out of bounds leave the agent
// in place; entering the goal pays reward 1 and the goal is terminal.
GridWorld build_gridworld(const GridSpec& spec, double gamma);

}  // namespace rlab
