#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atlforge {

using VarId = int;
using AgentId = int;
using ActionId = int;

/// Owner tag for variables that belong to the environment rather than an agent.
inline constexpr AgentId kEnvironment = -1;

struct Domain {
  bool boolean = false;
  int lo = 0;
  int hi = 1;

  int size() const { return hi - lo + 1; }
  bool contains(int v) const { return v >= lo && v <= hi; }
  bool operator==(const Domain&) const = default;
};

struct VarDecl {
  std::string name;
  Domain domain;
  AgentId owner = kEnvironment;
  bool operator==(const VarDecl&) const = default;
};

/// Integer/boolean expression over model variables. Booleans evaluate to 0/1.
struct Expr {
  enum class Kind {
    IntLit,
    BoolLit,
    Var,       // value = VarId
    ActionIs,  // value = AgentId, action = ActionId
    Not,
    Neg,
    And,
    Or,
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
  };

  Kind kind = Kind::IntLit;
  int value = 0;
  int action = 0;
  std::vector<Expr> args;

  bool operator==(const Expr&) const = default;

  static Expr literal(int v) { return {Kind::IntLit, v, 0, {}}; }
  static Expr boolean(bool b) { return {Kind::BoolLit, b ? 1 : 0, 0, {}}; }
  static Expr var(VarId id) { return {Kind::Var, id, 0, {}}; }
  static Expr action_is(AgentId agent, ActionId action) { return {Kind::ActionIs, agent, action, {}}; }
  static Expr unary(Kind k, Expr a) { return {k, 0, 0, {std::move(a)}}; }
  static Expr binary(Kind k, Expr a, Expr b) { return {k, 0, 0, {std::move(a), std::move(b)}}; }
};

struct Assignment {
  VarId target = 0;
  Expr value;
  bool operator==(const Assignment&) const = default;
};

struct EvolutionRule {
  std::vector<Assignment> assignments;
  Expr condition;
  bool operator==(const EvolutionRule&) const = default;
};

struct ProtocolRule {
  std::optional<Expr> condition;  // empty for the `Other` rule
  std::vector<ActionId> actions;
  bool operator==(const ProtocolRule&) const = default;
};

struct AgentDecl {
  std::string name;
  std::vector<VarId> locals;
  std::vector<std::string> actions;
  std::optional<std::vector<ProtocolRule>> protocol;
  std::vector<EvolutionRule> evolution;
  bool operator==(const AgentDecl&) const = default;

  std::optional<ActionId> find_action(std::string_view action) const;
};

struct PropositionDef {
  std::string name;
  Expr condition;
  bool operator==(const PropositionDef&) const = default;
};

struct Group {
  std::string name;
  std::vector<AgentId> members;  // sorted
  bool operator==(const Group&) const = default;
};

/// ATL formula. Coalition operators carry the coalition label as written
/// (a group or agent name) plus the resolved, sorted member list.
struct Formula {
  enum class Kind { Atom, Not, And, Or, X, F, G, U };

  Kind kind = Kind::Atom;
  std::string name;
  std::vector<AgentId> coalition;
  std::vector<Formula> args;

  bool operator==(const Formula&) const = default;

  bool is_strategic() const { return kind == Kind::X || kind == Kind::F || kind == Kind::G || kind == Kind::U; }

  static Formula atom(std::string name) { return {Kind::Atom, std::move(name), {}, {}}; }
  static Formula negation(Formula f) { return {Kind::Not, {}, {}, {std::move(f)}}; }
  static Formula conjunction(Formula a, Formula b) { return {Kind::And, {}, {}, {std::move(a), std::move(b)}}; }
  static Formula disjunction(Formula a, Formula b) { return {Kind::Or, {}, {}, {std::move(a), std::move(b)}}; }
  static Formula temporal(Kind k, std::string label, std::vector<AgentId> coalition, std::vector<Formula> args) {
    return {k, std::move(label), std::move(coalition), std::move(args)};
  }
};

/// Parsed and validated interpreted-systems model.
struct ModelSpec {
  /// Environment variables first, then each agent's locals in agent order.
  std::vector<VarDecl> variables;
  std::vector<EvolutionRule> env_evolution;
  std::vector<AgentDecl> agents;
  std::vector<PropositionDef> propositions;
  std::vector<Group> groups;
  std::vector<Formula> formulas;

  bool operator==(const ModelSpec&) const = default;

  std::vector<VarId> environment_vars() const;
  std::optional<AgentId> find_agent(std::string_view name) const;
  /// Looks up `name` owned by `owner`.
  std::optional<VarId> find_var(AgentId owner, std::string_view name) const;
  /// Accepts `Owner.name`, or a bare name when it is unique across owners.
  std::optional<VarId> resolve_var(std::string_view qualified) const;
  const PropositionDef* find_proposition(std::string_view name) const;
  const Group* find_group(std::string_view name) const;

  std::string owner_name(AgentId owner) const;
  std::string qualified_name(VarId id) const;
  std::string format_value(VarId id, int value) const;
  /// Parses `true`/`false` or an integer literal against the variable's domain.
  std::optional<int> parse_value(VarId id, std::string_view text) const;
};

}  // namespace atlforge
