#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/agentspeak.hpp"
#include "atlforge/cgm.hpp"

namespace atlforge {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(Cell c);

struct GridMap {
  int rows = 1;
  int cols = 1;
  std::set<Cell> obstacles;
  Cell treasure;

  bool inside(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  bool obstacle(Cell c) const { return obstacles.contains(c); }
  bool walkable(Cell c) const { return inside(c) && !obstacle(c); }
  std::vector<Cell> walkable_cells() const;

  /// 4x3 grid, obstacles (1,1) and (2,1), treasure at (3,2).
  static GridMap goldseeker();
};

/// Own cell plus the contiguous cells in each compass direction up to the map
/// edge; an obstacle ends the ray and is itself visible. Sorted.
std::vector<Cell> line_of_sight(const GridMap& map, Cell from);

struct WorldState {
  std::vector<Cell> pos;     // per agent
  std::vector<bool> mined;   // per agent
  bool treasure_mined = false;
  auto operator<=>(const WorldState&) const = default;
};

/// What an agent sees: the kind of each neighbouring cell, every agent and
/// the treasure inside its line of sight as offsets from its own cell, and
/// whether the treasure has been mined.
struct Percept {
  enum class Side { Open, Obstacle, Edge };
  struct Sighting {
    std::string what;  // agent name or "treasure"
    int drow = 0;
    int dcol = 0;
    auto operator<=>(const Sighting&) const = default;
  };

  Side north = Side::Open, south = Side::Open, east = Side::Open, west = Side::Open;
  std::vector<Sighting> seen;  // sorted
  bool treasure_mined = false;

  bool operator==(const Percept&) const = default;
  std::string str() const;
};

using AgentBelief = std::set<WorldState>;

/// Per-variable values across the candidate worlds, named as in the model
/// (`row<Agent>`, `column<Agent>`, `treasureMined`), in a fixed order.
struct Hull {
  std::vector<std::pair<std::string, std::vector<int>>> vars;
  bool boolean(std::string_view name) const { return name == "treasureMined"; }
  const std::vector<int>* find(std::string_view name) const;
  bool operator==(const Hull&) const = default;
};

/// Deterministic grid world with the model's movement and mining rules.
class GridWorld {
 public:
  static const std::vector<std::string>& action_names();  // right, left, up, down, mine

  GridWorld(GridMap map, std::vector<std::string> agents);

  const GridMap& map() const { return map_; }
  const std::vector<std::string>& agents() const { return agents_; }
  std::optional<std::size_t> find_agent(std::string_view name) const;

  /// Applies one action per agent; nullopt means the agent stays put.
  /// Blocked and off-grid moves leave the agent in place; mining twice does
  /// nothing; the treasure is mined when both agents mine on its cell.
  WorldState step(const WorldState& w, const std::vector<std::optional<std::string>>& actions) const;

  Percept perceive(const WorldState& w, std::size_t observer) const;

  /// Every world on walkable cells with nothing mined that produces `percept`.
  AgentBelief initial_belief(std::size_t observer, const Percept& percept) const;

  /// Progression under the observer's own action and every option of the
  /// others (each action or staying put), then filtering by `percept`.
  /// Throws RuntimeFailure when nothing survives.
  AgentBelief update_belief(const AgentBelief& belief, std::size_t observer,
                            const std::optional<std::string>& own_action, const Percept& percept) const;

  Hull project_hull(const AgentBelief& belief) const;

  /// Cross-checks the dynamics against a model's transition function on every
  /// state and joint action; returns the first disagreement.
  std::optional<std::string> disagreement_with(const Cgm& cgm) const;

 private:
  GridMap map_;
  std::vector<std::string> agents_;
};

std::vector<GuardAtom> hull_guard(const Hull& hull);

/// Plans of one library indexed by goal and guard.
class PlanLibrary {
 public:
  PlanLibrary() = default;
  explicit PlanLibrary(std::vector<Plan> plans);

  std::size_t size() const { return plans_.size(); }
  const std::vector<Plan>& plans() const { return plans_; }
  /// The unique plan for `goal` whose guard equals the hull. Throws
  /// RuntimeFailure when there is none or more than one.
  const Plan& select(const std::string& goal, const Hull& hull) const;
  const Plan& select(const std::string& goal, std::span<const GuardAtom> guard) const;
  /// Goal of the first plan, if any.
  std::optional<std::string> first_goal() const;

 private:
  std::vector<Plan> plans_;
  std::map<std::string, std::vector<std::size_t>> index_;  // goal|guard key -> plans
};

struct ReplayScript {
  struct Expectation {
    enum class Kind { Hull, Excludes, At, Cells };
    int line = 0;
    std::size_t step = 0;  // 1-based perception number
    std::string agent;     // observer
    Kind kind = Kind::Hull;
    std::string subject;   // variable name or, for Cells, the agent whose cells are listed
    std::vector<std::string> values;
  };

  std::map<std::string, std::vector<std::string>> actions;
  std::vector<Expectation> expectations;
};

/// Sections `[<Agent>]` list one action per line; an optional `[expect]`
/// section holds lines of the form
///   <step> <agent> hull <var> <v>...      exact hull of a variable
///   <step> <agent> excludes <var> <v>...  values absent from the hull
///   <step> <agent> at <row>,<col>         true position at that perception
///   <step> <agent> cells <other> <r>,<c>...  exact set of `other`'s cells across worlds
/// `#` starts a comment.
ReplayScript parse_replay_script(std::string_view text);

enum class Mode { Closed, Replay };

struct AgentSetup {
  std::string name;
  Cell start;
  PlanLibrary library;
  std::string goal;  // empty: the library's first goal
};

struct AgentStep {
  Percept percept;
  std::size_t worlds = 0;
  Hull hull;
  std::map<std::string, std::set<Cell>> cells;  // per agent, across the candidate worlds
  bool reselected = false;
  std::optional<Plan> plan;
  std::size_t cursor = 0;  // next body position after this step's action
  std::optional<std::string> action;
};

struct TraceStep {
  std::size_t index = 0;  // 1-based perception number
  WorldState world;
  std::vector<AgentStep> agents;
};

struct Trace {
  std::vector<std::string> agents;
  std::vector<TraceStep> steps;
  bool treasure_mined = false;
  std::optional<std::string> failure;
};

/// Lockstep episode: perceive, update beliefs, reselect on hull change, act,
/// step the world. Stops when the treasure is mined, after `max_steps`
/// actions, or on the first failure (recorded in the trace). Replay mode
/// takes actions from the script and runs one perception past its longest
/// section; libraries are optional there.
Trace run_episode(const GridWorld& world, std::vector<AgentSetup> agents, Mode mode, const ReplayScript* script,
                  std::size_t max_steps);

void write_trace(const Trace& trace, std::ostream& os);

/// Failed expectations, one message each.
std::vector<std::string> check_expectations(const Trace& trace, const ReplayScript& script);

}  // namespace atlforge
