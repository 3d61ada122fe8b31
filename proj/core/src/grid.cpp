#include "rlab/grid.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace rlab {

const char kDidacticLayoutName[] = "didactic-24x16";

namespace {
// Three 22-wide rooms stacked top to bottom. Room exits sit at offset
// columns so every room requires lateral travel before the next hallway.
const char* kDidacticAscii =
    "########################\n"
    "#......................#\n"
    "#.S....................#\n"
    "#......................#\n"
    "#......................#\n"
    "#######H################\n"
    "#######H################\n"
    "#......................#\n"
    "#......................#\n"
    "#......................#\n"
    "#......................#\n"
    "#####H##################\n"
    "#####H##################\n"
    "#......................#\n"
    "#....................G.#\n"
    "########################\n";
}  // namespace

const std::string& didactic_layout_ascii() {
  static const std::string ascii(kDidacticAscii);
  return ascii;
}

GridSpec builtin_layout(const std::string& name) {
  if (name == kDidacticLayoutName) return GridSpec::parse(didactic_layout_ascii());
  throw RlabError("unknown built-in layout: " + name);
}

GridSpec GridSpec::parse(const std::string& ascii_map) {
  std::vector<std::string> rows;
  std::istringstream in(ascii_map);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  detail::check(!rows.empty(), "empty map");
  GridSpec g;
  g.height = static_cast<int>(rows.size());
  g.width = static_cast<int>(rows[0].size());
  g.wall.assign(static_cast<std::size_t>(g.width) * g.height, 1);
  g.region.assign(static_cast<std::size_t>(g.width) * g.height, Region::Room);
  bool saw_start = false, saw_goal = false;
  for (int y = 0; y < g.height; ++y) {
    detail::check(static_cast<int>(rows[y].size()) == g.width, "ragged map row");
    for (int x = 0; x < g.width; ++x) {
      const char c = rows[y][x];
      const std::size_t i = static_cast<std::size_t>(y) * g.width + x;
      switch (c) {
        case '#': break;
        case '.': g.wall[i] = 0; break;
        case 'H': g.wall[i] = 0; g.region[i] = Region::Hallway; break;
        case 'S': g.wall[i] = 0; g.start = {x, y}; saw_start = true; break;
        case 'G': g.wall[i] = 0; g.goal = {x, y}; saw_goal = true; break;
        default: throw RlabError(std::string("bad map character '") + c + "'");
      }
    }
  }
  detail::check(saw_start, "map has no start cell");
  detail::check(saw_goal, "map has no goal cell");
  g.validate();
  return g;
}

GridSpec GridSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RlabError("cannot open map file: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse(body.str());
}

std::string GridSpec::to_ascii() const {
  std::string out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      char c = '#';
      if (!is_wall(x, y)) c = region_at(x, y) == Region::Hallway ? 'H' : '.';
      if (start == Cell{x, y}) c = 'S';
      if (goal == Cell{x, y}) c = 'G';
      out.push_back(c);
    }
    out.push_back('\n');
  }
  return out;
}

void GridSpec::validate() const {
  detail::check(in_bounds(start.x, start.y) && !is_wall(start.x, start.y), "start is invalid");
  detail::check(in_bounds(goal.x, goal.y) && !is_wall(goal.x, goal.y), "goal is invalid");
  detail::check(!(start == goal), "start equals goal");
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (is_wall(x, y)) continue;
      bool has_neighbor = false;
      for (int a = 0; a < 4; ++a) {
        const int nx = x + kActionDelta[a][0], ny = y + kActionDelta[a][1];
        if (in_bounds(nx, ny) && !is_wall(nx, ny)) has_neighbor = true;
      }
      detail::check(has_neighbor, "isolated free cell at (" + std::to_string(x) + "," +
                                      std::to_string(y) + ")");
    }
  }
  // Reachability check (breadth-first search from start).
  std::vector<std::uint8_t> seen(wall.size(), 0);
  std::deque<Cell> frontier{start};
  seen[static_cast<std::size_t>(start.y) * width + start.x] = 1;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < 4; ++a) {
      const int nx = c.x + kActionDelta[a][0], ny = c.y + kActionDelta[a][1];
      if (!in_bounds(nx, ny) || is_wall(nx, ny)) continue;
      std::uint8_t& mark = seen[static_cast<std::size_t>(ny) * width + nx];
      if (!mark) {
        mark = 1;
        frontier.push_back({nx, ny});
      }
    }
  }
  if (!seen[static_cast<std::size_t>(goal.y) * width + goal.x]) {
    throw RlabError("UnreachableGoal: no path from start to goal");
  }
}

GridWorld build_gridworld(const GridSpec& spec, double gamma) {
  spec.validate();
  GridWorld gw;
  gw.spec = spec;
  gw.cell_to_state.assign(static_cast<std::size_t>(spec.width) * spec.height, -1);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (spec.is_wall(x, y)) continue;
      gw.cell_to_state[static_cast<std::size_t>(y) * spec.width + x] =
          static_cast<int>(gw.state_to_cell.size());
      gw.state_to_cell.push_back({x, y});
    }
  }
  const int n = static_cast<int>(gw.state_to_cell.size());
  gw.start_state = gw.state_at(spec.start.x, spec.start.y);
  gw.goal_state = gw.state_at(spec.goal.x, spec.goal.y);

  TabularMdp& m = gw.mdp;
  m.n_states = n;
  m.n_actions = kNumActions;
  m.gamma = gamma;
  m.transition.assign(static_cast<std::size_t>(n) * kNumActions * n, 0.0);
  m.reward = StateActionTable(n, kNumActions, 0.0);
  m.initial_dist.assign(n, 0.0);
  m.initial_dist[gw.start_state] = 1.0;
  m.terminal.assign(n, 0);
  m.terminal[gw.goal_state] = 1;

  for (int s = 0; s < n; ++s) {
    const Cell c = gw.state_to_cell[s];
    for (int a = 0; a < kNumActions; ++a) {
      int next = s;
      if (s != gw.goal_state) {
        const int nx = c.x + kActionDelta[a][0], ny = c.y + kActionDelta[a][1];
        if (spec.in_bounds(nx, ny) && !spec.is_wall(nx, ny)) next = gw.state_at(nx, ny);
      }
      m.next_dist_mut(s, a)[next] = 1.0;
      if (s != gw.goal_state && next == gw.goal_state) m.reward(s, a) = 1.0;
    }
  }
  m.validate();
  return gw;
}

std::vector<int> GridWorld::goal_distance() const {
  std::vector<int> dist(mdp.n_states, -1);
  std::deque<int> frontier{goal_state};
  dist[goal_state] = 0;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    const Cell c = state_to_cell[s];
    for (int a = 0; a < 4; ++a) {
      const int nx = c.x + kActionDelta[a][0], ny = c.y + kActionDelta[a][1];
      if (!spec.in_bounds(nx, ny) || spec.is_wall(nx, ny)) continue;
      const int t = state_at(nx, ny);
      if (dist[t] < 0) {
        dist[t] = dist[s] + 1;
        frontier.push_back(t);
      }
    }
  }
  return dist;
}

std::vector<int> GridWorld::room_components(int* n_rooms) const {
  std::vector<int> room_id(mdp.n_states, -1);
  int next_id = 0;
  for (int s = 0; s < mdp.n_states; ++s) {
    const Cell c0 = state_to_cell[s];
    if (spec.region_at(c0.x, c0.y) != Region::Room || room_id[s] >= 0) continue;
    std::deque<int> frontier{s};
    room_id[s] = next_id;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop_front();
      const Cell c = state_to_cell[cur];
      for (int a = 0; a < 4; ++a) {
        const int nx = c.x + kActionDelta[a][0], ny = c.y + kActionDelta[a][1];
        if (!spec.in_bounds(nx, ny) || spec.is_wall(nx, ny)) continue;
        if (spec.region_at(nx, ny) != Region::Room) continue;
        const int t = state_at(nx, ny);
        if (room_id[t] < 0) {
          room_id[t] = next_id;
          frontier.push_back(t);
        }
      }
    }
    ++next_id;
  }
  if (n_rooms) *n_rooms = next_id;
  return room_id;
}

}  // namespace rlab
