#include "atlforge/atl.hpp"

#include <algorithm>
#include <functional>

#include "atlforge/error.hpp"

namespace atlforge {
namespace {

struct Move {
  std::vector<ActionId> actions;  // coalition order
  std::vector<StateId> outcomes;  // one per counter-move, deduplicated
};

// Coalition moves per state, lexicographically ordered.
using MoveTable = std::vector<std::vector<Move>>;

MoveTable build_moves(const Cgm& cgm, std::span<const AgentId> coalition) {
  MoveTable table(cgm.num_states());
  for (StateId s = 0; s < cgm.num_states(); ++s) {
    std::map<std::vector<ActionId>, std::vector<StateId>> grouped;
    for (std::size_t j = 0; j < cgm.num_joint(); ++j) {
      auto t = cgm.transition(s, j);
      if (t < 0) continue;
      JointAction joint = cgm.decode_joint(j);
      std::vector<ActionId> key;
      key.reserve(coalition.size());
      for (AgentId a : coalition) key.push_back(joint[a]);
      grouped[key].push_back(static_cast<StateId>(t));
    }
    for (auto& [key, outs] : grouped) {
      std::sort(outs.begin(), outs.end());
      outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
      table[s].push_back(Move{key, std::move(outs)});
    }
  }
  return table;
}

bool within(const Move& m, const StateSet& target) {
  return std::all_of(m.outcomes.begin(), m.outcomes.end(), [&](StateId t) { return target.test(t); });
}

// Restricts which coalition moves may be used at a state; empty = all.
using Allowed = std::function<bool(StateId, const std::vector<ActionId>&)>;

bool allowed_at(const Allowed& allowed, StateId s, const Move& m) { return !allowed || allowed(s, m.actions); }

struct Solved {
  StateSet sat;
  std::map<StateId, std::vector<ActionId>> choice;
  std::vector<int> rank;
};

const Move* first_move_into(const MoveTable& moves, const Allowed& allowed, StateId s, const StateSet& target) {
  for (const auto& m : moves[s])
    if (allowed_at(allowed, s, m) && within(m, target)) return &m;
  return nullptr;
}

Solved solve_next(const MoveTable& moves, const Allowed& allowed, const StateSet& target) {
  Solved out{StateSet(moves.size()), {}, {}};
  for (StateId s = 0; s < moves.size(); ++s) {
    if (const Move* m = first_move_into(moves, allowed, s, target)) {
      out.sat.set(s);
      out.choice.emplace(s, m->actions);
    }
  }
  return out;
}

// Least fixpoint Z = goal ∪ (stay ∩ pre(Z)), recording the iteration rank.
Solved solve_until(const MoveTable& moves, const Allowed& allowed, const StateSet& stay, const StateSet& goal) {
  const std::size_t n = moves.size();
  Solved out{goal, {}, std::vector<int>(n, -1)};
  for (std::size_t s = goal.find_first(); s != StateSet::npos; s = goal.find_next(s)) out.rank[s] = 0;
  for (int k = 1;; ++k) {
    StateSet added(n);
    for (StateId s = 0; s < n; ++s) {
      if (out.sat.test(s) || !stay.test(s)) continue;
      if (const Move* m = first_move_into(moves, allowed, s, out.sat)) {
        added.set(s);
        out.choice.emplace(s, m->actions);
        out.rank[s] = k;
      }
    }
    if (added.none()) break;
    out.sat |= added;
  }
  return out;
}

// Greatest fixpoint Z = safe ∩ pre(Z).
Solved solve_safety(const MoveTable& moves, const Allowed& allowed, const StateSet& safe) {
  const std::size_t n = moves.size();
  StateSet z = safe;
  while (true) {
    StateSet next(n);
    for (std::size_t s = z.find_first(); s != StateSet::npos; s = z.find_next(s)) {
      if (first_move_into(moves, allowed, static_cast<StateId>(s), z)) next.set(s);
    }
    if (next == z) break;
    z = std::move(next);
  }
  Solved out{z, {}, {}};
  for (std::size_t s = z.find_first(); s != StateSet::npos; s = z.find_next(s)) {
    out.choice.emplace(static_cast<StateId>(s), first_move_into(moves, allowed, static_cast<StateId>(s), z)->actions);
  }
  return out;
}

// First <<B>>X conjunct reachable through `and` nodes.
const Formula* finishing_conjunct(const Formula& f) {
  if (f.kind == Formula::Kind::X) return &f;
  if (f.kind != Formula::Kind::And) return nullptr;
  if (const Formula* l = finishing_conjunct(f.args[0])) return l;
  return finishing_conjunct(f.args[1]);
}

StrategyMap::Objective objective_of(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::X: return StrategyMap::Objective::Next;
    case Formula::Kind::F: return StrategyMap::Objective::Reach;
    case Formula::Kind::U: return StrategyMap::Objective::Until;
    case Formula::Kind::G: return StrategyMap::Objective::Safety;
    default: return StrategyMap::Objective::None;
  }
}

// Solves the outermost strategic operator of `f`, optionally restricting the
// coalition's moves and the finishing move.
struct Synthesis {
  StrategyMap strategy;
  StateSet sat;
};

Synthesis synthesize(const Cgm& cgm, const Formula& f, const MoveTable& moves, const Allowed& allowed,
                     const Allowed& finish_allowed) {
  Synthesis out;
  auto& st = out.strategy;
  st.objective = objective_of(f.kind);
  st.coalition = f.coalition;
  Solved solved;
  switch (f.kind) {
    case Formula::Kind::X: {
      st.goal = satisfying_states(cgm, f.args[0]);
      solved = solve_next(moves, allowed, st.goal);
      break;
    }
    case Formula::Kind::G: {
      StateSet safe = satisfying_states(cgm, f.args[0]);
      solved = solve_safety(moves, allowed, safe);
      st.goal = solved.sat;
      break;
    }
    case Formula::Kind::F:
    case Formula::Kind::U: {
      const Formula& target = f.kind == Formula::Kind::F ? f.args[0] : f.args[1];
      StateSet goal = satisfying_states(cgm, target);
      StateSet stay = f.kind == Formula::Kind::F ? cgm.full_set() : satisfying_states(cgm, f.args[0]);
      if (const Formula* x = finishing_conjunct(target)) {
        MoveTable xmoves = build_moves(cgm, x->coalition);
        Solved fin = solve_next(xmoves, finish_allowed, satisfying_states(cgm, x->args[0]));
        goal &= fin.sat;
        st.finish_coalition = x->coalition;
        for (std::size_t s = goal.find_first(); s != StateSet::npos; s = goal.find_next(s)) {
          st.finish.emplace(static_cast<StateId>(s), fin.choice.at(static_cast<StateId>(s)));
        }
      }
      st.goal = goal;
      solved = solve_until(moves, allowed, stay, goal);
      st.rank = solved.rank;
      break;
    }
    default: throw Error("synthesize called on a non-strategic formula");
  }
  st.choice = std::move(solved.choice);
  out.sat = std::move(solved.sat);
  return out;
}

}  // namespace

StateSet StrategyMap::domain(std::size_t num_states) const {
  StateSet d(num_states);
  for (const auto& [s, _] : choice) d.set(s);
  return d;
}

StateSet pre(const Cgm& cgm, std::span<const AgentId> coalition, const StateSet& target) {
  MoveTable moves = build_moves(cgm, coalition);
  return solve_next(moves, {}, target).sat;
}

StateSet satisfying_states(const Cgm& cgm, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom: return cgm.proposition(f.name);
    case Formula::Kind::Not: return ~satisfying_states(cgm, f.args[0]);
    case Formula::Kind::And: return satisfying_states(cgm, f.args[0]) & satisfying_states(cgm, f.args[1]);
    case Formula::Kind::Or: return satisfying_states(cgm, f.args[0]) | satisfying_states(cgm, f.args[1]);
    default: break;
  }
  MoveTable moves = build_moves(cgm, f.coalition);
  return synthesize(cgm, f, moves, {}, {}).sat;
}

CheckResult check(const Cgm& cgm, const Formula& f, const StateSet& initial) {
  CheckResult r;
  if (!f.is_strategic()) {
    r.satisfying = satisfying_states(cgm, f);
    r.holds = initial.is_subset_of(r.satisfying);
    if (r.holds) r.strategy = StrategyMap{};
    return r;
  }
  MoveTable moves = build_moves(cgm, f.coalition);
  Synthesis syn = synthesize(cgm, f, moves, {}, {});
  r.satisfying = std::move(syn.sat);
  r.holds = initial.is_subset_of(r.satisfying);
  if (r.holds) r.strategy = std::move(syn.strategy);
  return r;
}

std::optional<StrategyMap> find_uniform_strategy(const Cgm& cgm, const Formula& f, const BeliefState& belief,
                                                 AgentId agent) {
  return find_uniform_strategy(cgm, f, belief_states(cgm, belief), agent);
}

std::optional<StrategyMap> find_uniform_strategy(const Cgm& cgm, const Formula& f, const StateSet& initial,
                                                 AgentId agent) {
  UniformSearch search(cgm, f, agent);
  return search.solve(initial);
}

struct UniformSearch::Impl {
  const Cgm& cgm;
  Formula f;
  AgentId agent;
  std::size_t node_budget;
  bool constrained = false;  // agent belongs to the outer coalition
  std::size_t pos = 0;
  bool finish_constrained = false;
  std::size_t finish_pos = 0;
  std::vector<int> obs;
  std::size_t num_classes = 0;
  MoveTable moves;
  std::vector<ActionId> sigma;
  Allowed allowed;
  Allowed finish_allowed;
  std::map<std::vector<ActionId>, std::shared_ptr<const Synthesis>> memo;

  Impl(const Cgm& c, Formula formula, AgentId a, std::size_t budget)
      : cgm(c), f(std::move(formula)), agent(a), node_budget(budget) {
    if (!f.is_strategic() || !std::binary_search(f.coalition.begin(), f.coalition.end(), agent)) return;
    constrained = true;
    pos = std::lower_bound(f.coalition.begin(), f.coalition.end(), agent) - f.coalition.begin();
    const std::size_t n = cgm.num_states();

    // Observation classes: states agreeing on the agent's local variables.
    obs.resize(n);
    std::map<std::vector<int>, int> ids;
    for (StateId s = 0; s < n; ++s) {
      std::vector<int> key;
      for (VarId v : cgm.observed_vars(agent)) key.push_back(cgm.value(s, v));
      obs[s] = ids.emplace(key, static_cast<int>(ids.size())).first->second;
    }
    num_classes = ids.size();
    sigma.assign(num_classes, -1);
    moves = build_moves(cgm, f.coalition);
    allowed = [this](StateId s, const std::vector<ActionId>& m) {
      return sigma[obs[s]] < 0 || m[pos] == sigma[obs[s]];
    };
    const Formula* x = nullptr;
    if (f.kind == Formula::Kind::F || f.kind == Formula::Kind::U) {
      x = finishing_conjunct(f.kind == Formula::Kind::F ? f.args[0] : f.args[1]);
    }
    if (x && std::binary_search(x->coalition.begin(), x->coalition.end(), agent)) {
      finish_constrained = true;
      finish_pos = std::lower_bound(x->coalition.begin(), x->coalition.end(), agent) - x->coalition.begin();
      finish_allowed = [this](StateId s, const std::vector<ActionId>& m) {
        return sigma[obs[s]] < 0 || m[finish_pos] == sigma[obs[s]];
      };
    }
  }

  std::shared_ptr<const Synthesis> synthesis() {
    if (auto it = memo.find(sigma); it != memo.end()) return it->second;
    if (memo.size() >= 2048) memo.clear();
    auto syn = std::make_shared<const Synthesis>(synthesize(cgm, f, moves, allowed, finish_allowed));
    memo.emplace(sigma, syn);
    return syn;
  }

  // First state where the agent acts under an unfixed observation along a
  // strategy-consistent play from `initial`.
  std::optional<StateId> open_state(const StrategyMap& st, const StateSet& initial) const {
    using O = StrategyMap::Objective;
    const std::size_t n = cgm.num_states();
    StateSet seen(n);
    std::vector<StateId> stack;
    for (std::size_t s = initial.find_first(); s != StateSet::npos; s = initial.find_next(s)) {
      stack.push_back(static_cast<StateId>(s));
      seen.set(s);
    }
    std::reverse(stack.begin(), stack.end());
    while (!stack.empty()) {
      StateId s = stack.back();
      stack.pop_back();
      if ((st.objective == O::Reach || st.objective == O::Until) && st.goal.test(s)) {
        if (finish_constrained && sigma[obs[s]] < 0) return s;
        continue;
      }
      if (sigma[obs[s]] < 0) return s;
      if (st.objective == O::Next) continue;
      const auto& move = st.choice.at(s);
      for (const auto& m : moves[s]) {
        if (m.actions != move) continue;
        for (StateId t : m.outcomes) {
          if (!seen.test(t)) {
            seen.set(t);
            stack.push_back(t);
          }
        }
      }
    }
    return std::nullopt;
  }

  std::optional<StrategyMap> search(const StateSet& initial, std::size_t& budget) {
    if (budget-- == 0) throw StrategyError("uniform strategy search exceeded its node budget");
    auto syn = synthesis();
    if (!initial.is_subset_of(syn->sat)) return std::nullopt;
    auto open = open_state(syn->strategy, initial);
    if (!open) {
      StrategyMap out = syn->strategy;
      out.uniform_action.assign(cgm.num_states(), -1);
      for (StateId s = 0; s < cgm.num_states(); ++s) out.uniform_action[s] = sigma[obs[s]];
      return out;
    }
    const int cls = obs[*open];
    for (ActionId a = 0; a < static_cast<ActionId>(cgm.actions(agent).size()); ++a) {
      sigma[cls] = a;
      auto found = search(initial, budget);
      if (found) {
        sigma.assign(num_classes, -1);
        return found;
      }
    }
    sigma[cls] = -1;
    return std::nullopt;
  }
};

UniformSearch::UniformSearch(const Cgm& cgm, Formula formula, AgentId agent, std::size_t node_budget)
    : impl_(std::make_unique<Impl>(cgm, std::move(formula), agent, node_budget)) {}

UniformSearch::~UniformSearch() = default;

std::optional<StrategyMap> UniformSearch::solve(const StateSet& initial) {
  Impl& m = *impl_;
  if (!m.constrained) {
    // The agent's choices are not constrained by the formula; uniformity is vacuous.
    auto r = check(m.cgm, m.f, initial);
    return r.holds ? r.strategy : std::nullopt;
  }
  std::size_t budget = m.node_budget;
  try {
    return m.search(initial, budget);
  } catch (...) {
    m.sigma.assign(m.num_classes, -1);
    throw;
  }
}

JointAction complete_move(const Cgm& cgm, StateId s, std::span<const AgentId> coalition,
                          std::span<const ActionId> move) {
  JointAction joint(cgm.num_agents());
  for (AgentId a = 0; a < static_cast<AgentId>(joint.size()); ++a) joint[a] = cgm.enabled(a, s).front();
  for (std::size_t i = 0; i < coalition.size(); ++i) joint[coalition[i]] = move[i];
  return joint;
}

std::vector<ActionId> linearize(const Cgm& cgm, const StrategyMap& strategy, const BeliefState& belief,
                                AgentId agent, std::size_t horizon) {
  return linearize(cgm, strategy, belief_states(cgm, belief), agent, horizon);
}

std::vector<ActionId> linearize(const Cgm& cgm, const StrategyMap& strategy, const StateSet& initial, AgentId agent,
                                std::size_t horizon) {
  using O = StrategyMap::Objective;
  if (strategy.objective != O::Next && strategy.objective != O::Reach && strategy.objective != O::Until) {
    throw StrategyError("non-linearizable goal: only <<A>>X, <<A>>F and <<A>>U objectives produce action sequences");
  }
  auto first = initial.find_first();
  if (first == StateSet::npos) throw StrategyError("cannot linearize from an empty belief set");
  StateId s = static_cast<StateId>(first);
  std::vector<ActionId> body;
  auto push = [&](ActionId a) {
    if (body.size() >= horizon) throw StrategyError("horizon exceeded: objective not met within " + std::to_string(horizon) + " actions");
    body.push_back(a);
  };
  auto step = [&](const std::map<StateId, std::vector<ActionId>>& table, const std::vector<AgentId>& coalition) {
    auto it = table.find(s);
    if (it == table.end()) throw StrategyError("strategy undefined in state s" + std::to_string(s));
    JointAction joint = complete_move(cgm, s, coalition, it->second);
    push(joint[agent]);
    return cgm.successor(s, joint);
  };
  if (strategy.objective == O::Next) {
    step(strategy.choice, strategy.coalition);
    return body;
  }
  while (!strategy.goal.test(s)) s = step(strategy.choice, strategy.coalition);
  if (!strategy.finish.empty()) step(strategy.finish, strategy.finish_coalition);
  return body;
}

void write_witness(const Cgm& cgm, const StrategyMap& strategy, StateId start, std::size_t horizon,
                   std::ostream& os) {
  using O = StrategyMap::Objective;
  StateId s = start;
  auto emit = [&](std::size_t k, const std::map<StateId, std::vector<ActionId>>& table,
                  const std::vector<AgentId>& coalition) -> bool {
    auto it = table.find(s);
    if (it == table.end()) return false;
    JointAction joint = complete_move(cgm, s, coalition, it->second);
    StateId t = cgm.successor(s, joint);
    os << "step " << k << ": state s" << s << ", joint (";
    for (std::size_t a = 0; a < joint.size(); ++a) os << (a ? "," : "") << cgm.actions(static_cast<AgentId>(a))[joint[a]];
    os << ") -> s" << t << '\n';
    s = t;
    return true;
  };
  switch (strategy.objective) {
    case O::None: return;
    case O::Next: emit(0, strategy.choice, strategy.coalition); return;
    case O::Safety: {
      for (std::size_t k = 0; k < horizon; ++k)
        if (!emit(k, strategy.choice, strategy.coalition)) return;
      return;
    }
    case O::Reach:
    case O::Until: {
      std::size_t k = 0;
      for (; k < horizon && !strategy.goal.test(s); ++k)
        if (!emit(k, strategy.choice, strategy.coalition)) return;
      if (strategy.goal.test(s) && !strategy.finish.empty()) emit(k, strategy.finish, strategy.finish_coalition);
      return;
    }
  }
}

}  // namespace atlforge
