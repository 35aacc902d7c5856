#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/model.hpp"

namespace atlforge {

using StateId = std::uint32_t;
using StateSet = boost::dynamic_bitset<>;
/// One action per non-environment agent, in declared agent order.
using JointAction = std::vector<ActionId>;

/// Explicit concurrent game model. States are the mixed-radix encoding of a
/// dense variable assignment (first declared variable most significant), so
/// state order is the lexicographic order of assignments.
///
/// Immutable after construction; every query is const.
class Cgm {
 public:
  /// Raw description for models that do not come from a model file. The
  /// state space is exposed as a single environment variable `state`.
  struct Explicit {
    std::vector<std::string> agents;
    std::vector<std::vector<std::string>> actions;  // per agent
    std::size_t num_states = 0;
    /// enabled[agent][state]; an empty inner list means every action.
    std::vector<std::vector<std::vector<ActionId>>> enabled;
    /// transitions[state][joint index]; ignored for disabled joint actions.
    std::vector<std::vector<StateId>> transitions;
    std::map<std::string, std::vector<StateId>> propositions;
  };

  static Cgm from_explicit(const Explicit& description);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_agents() const { return agent_names_.size(); }
  const std::string& agent_name(AgentId a) const { return agent_names_.at(a); }
  std::optional<AgentId> find_agent(std::string_view name) const;
  const std::vector<std::string>& actions(AgentId a) const { return actions_.at(a); }

  std::span<const ActionId> enabled(AgentId a, StateId s) const;
  bool is_enabled(AgentId a, StateId s, ActionId act) const;

  /// Number of joint action indices; the index is mixed radix over each
  /// agent's declared actions with the first agent most significant, so
  /// index order is the lexicographic order of action tuples.
  std::size_t num_joint() const { return num_joint_; }
  JointAction decode_joint(std::size_t index) const;
  std::size_t encode_joint(std::span<const ActionId> joint) const;
  /// Successor under a joint index, or -1 when some component is disabled.
  std::int64_t transition(StateId s, std::size_t joint_index) const {
    return table_[static_cast<std::size_t>(s) * num_joint_ + joint_index];
  }
  /// tf(s, joint). Throws StrategyError when a component is disabled at `s`.
  StateId successor(StateId s, std::span<const ActionId> joint) const;

  const std::vector<VarDecl>& variables() const { return variables_; }
  std::vector<int> decode(StateId s) const;
  StateId encode(std::span<const int> values) const;
  int value(StateId s, VarId v) const;
  std::string format_state(StateId s) const;

  bool has_proposition(std::string_view name) const;
  /// vf(name). Throws Error for an unknown proposition.
  const StateSet& proposition(std::string_view name) const;
  std::vector<std::string> proposition_names() const;

  /// Variables the agent observes: its own local variables.
  const std::vector<VarId>& observed_vars(AgentId a) const { return observed_.at(a); }
  /// Initial values of agent-local variables, keyed by variable.
  const std::map<VarId, int>& local_init() const { return local_init_; }
  /// The model this CGM was built from, when there is one.
  const ModelSpec* spec() const { return spec_.get(); }

  StateSet empty_set() const { return StateSet(num_states_); }
  StateSet full_set() const { return StateSet(num_states_).set(); }

 private:
  friend Cgm build_cgm(const ModelSpec&, const std::map<VarId, int>&);

  std::shared_ptr<const ModelSpec> spec_;
  std::vector<VarDecl> variables_;
  std::vector<std::size_t> radix_weight_;
  std::size_t num_states_ = 0;
  std::vector<std::string> agent_names_;
  std::vector<std::vector<std::string>> actions_;
  std::size_t num_joint_ = 1;
  std::vector<std::size_t> joint_weight_;
  // enabled_[agent][state] sorted action lists
  std::vector<std::vector<std::vector<ActionId>>> enabled_;
  std::vector<std::int64_t> table_;
  std::map<std::string, StateSet, std::less<>> props_;
  std::vector<std::vector<VarId>> observed_;
  std::map<VarId, int> local_init_;
};

/// Builds the explicit CGM: the state space is the product of all declared
/// domains; transitions fire every evolution rule whose condition holds
/// simultaneously, leaving unassigned variables unchanged.
///
/// `agent_init` must assign every agent-local variable; it seeds belief sets.
/// Throws ModelError on conflicting simultaneous assignments, out-of-domain
/// assignments and empty protocols.
Cgm build_cgm(const ModelSpec& spec, const std::map<VarId, int>& agent_init);

/// Evaluates an expression under a variable assignment and optional joint action.
int evaluate(const Expr& e, std::span<const int> values, std::span<const ActionId> joint = {});

/// An agent's belief over environment variables, split into statically fixed
/// values, known values and possible-value sets of two or more elements.
struct BeliefState {
  std::map<VarId, int> fixed;
  std::map<VarId, int> known;
  std::map<VarId, std::vector<int>> possible;  // sorted, size >= 2

  bool operator==(const BeliefState&) const = default;
  /// Canonical cache key: variables in id order, sorted value sets.
  std::string key() const;
  /// Value set for `v` regardless of category; empty when `v` is not covered.
  std::vector<int> values_of(VarId v) const;
};

/// All states matching the belief on environment variables, with agent
/// locals at their initial values.
StateSet belief_states(const Cgm& cgm, const BeliefState& belief);

/// Text listing: one line per state assignment, one per enabled transition.
void dump_cgm(const Cgm& cgm, std::ostream& os);

}  // namespace atlforge
