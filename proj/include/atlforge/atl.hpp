#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "atlforge/cgm.hpp"
#include "atlforge/model.hpp"

namespace atlforge {

/// Memoryless coalition strategy witnessing a strategic formula.
struct StrategyMap {
  enum class Objective { None, Next, Reach, Until, Safety };

  Objective objective = Objective::None;
  std::vector<AgentId> coalition;  // sorted
  /// One action per coalition member (coalition order) for each state in the domain.
  std::map<StateId, std::vector<ActionId>> choice;
  /// Next: [[φ]]. Reach/Until: states where the objective is met. Safety: the invariant region.
  StateSet goal;
  /// Reach/Until: fixpoint iteration at which a state entered the winning
  /// region (0 on the goal, -1 outside). Every chosen move strictly lowers it.
  std::vector<int> rank;

  /// When the reach target contains a conjunct <<B>>X(χ): B and the move
  /// realizing it at each goal state.
  std::vector<AgentId> finish_coalition;
  std::map<StateId, std::vector<ActionId>> finish;

  /// Filled by the uniform search: the selected agent's prescribed action in
  /// every state of an observation class the search fixed (-1 elsewhere).
  std::vector<ActionId> uniform_action;

  StateSet domain(std::size_t num_states) const;
};

struct CheckResult {
  StateSet satisfying;
  bool holds = false;
  std::optional<StrategyMap> strategy;
  bool uniform = false;
};

/// Controllable predecessor: states where the coalition has a move such that
/// every completion by the other agents lands in `target`.
StateSet pre(const Cgm& cgm, std::span<const AgentId> coalition, const StateSet& target);

/// [[f]] by bottom-up labeling.
StateSet satisfying_states(const Cgm& cgm, const Formula& f);

/// Labels `f` and reports whether every state of `initial` satisfies it.
/// The strategy is present iff the formula holds; for a non-strategic
/// outermost operator it is an empty strategy with objective None.
CheckResult check(const Cgm& cgm, const Formula& f, const StateSet& initial);

/// Searches for a strategy whose `agent` component depends only on the
/// agent's observation (its local variables), by backtracking over
/// per-observation-class action choices. Returns nullopt when none exists.
std::optional<StrategyMap> find_uniform_strategy(const Cgm& cgm, const Formula& f, const StateSet& initial,
                                                 AgentId agent);
std::optional<StrategyMap> find_uniform_strategy(const Cgm& cgm, const Formula& f, const BeliefState& belief,
                                                 AgentId agent);

/// Reusable form of find_uniform_strategy for many initial sets over the same
/// formula: game solutions for each partial observation assignment are shared
/// between calls.
class UniformSearch {
 public:
  UniformSearch(const Cgm& cgm, Formula formula, AgentId agent, std::size_t node_budget = 200000);
  ~UniformSearch();
  UniformSearch(const UniformSearch&) = delete;
  UniformSearch& operator=(const UniformSearch&) = delete;

  std::optional<StrategyMap> solve(const StateSet& initial);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Completes a coalition move with the first enabled action of every other agent.
JointAction complete_move(const Cgm& cgm, StateId s, std::span<const AgentId> coalition,
                          std::span<const ActionId> move);

/// Plays the strategy from the lowest-index state of `initial` until the
/// objective is met and returns `agent`'s actions, followed by its component
/// of the finishing X-move when there is one. Throws StrategyError for
/// safety/boolean objectives ("non-linearizable goal") or when more than
/// `horizon` actions would be needed.
std::vector<ActionId> linearize(const Cgm& cgm, const StrategyMap& strategy, const StateSet& initial, AgentId agent,
                                std::size_t horizon);
std::vector<ActionId> linearize(const Cgm& cgm, const StrategyMap& strategy, const BeliefState& belief,
                                AgentId agent, std::size_t horizon);

/// `step k: state s<i>, joint (a1,a2) -> s<j>` lines for the play from `start`.
void write_witness(const Cgm& cgm, const StrategyMap& strategy, StateId start, std::size_t horizon,
                   std::ostream& os);

}  // namespace atlforge
