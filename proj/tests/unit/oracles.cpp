#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace oracle {

using atlforge::ActionId;
using atlforge::JointAction;
using atlforge::StateSet;

Cgm random_model(std::mt19937& rng, std::size_t states, int max_actions) {
  std::uniform_int_distribution<int> nact(1, max_actions);
  Cgm::Explicit d;
  d.agents = {"A", "B"};
  d.num_states = states;
  for (int a = 0; a < 2; ++a) {
    int k = nact(rng);
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back("a" + std::to_string(i));
    d.actions.push_back(names);
    std::vector<std::vector<ActionId>> enabled(states);
    for (std::size_t s = 0; s < states; ++s) {
      for (int i = 0; i < k; ++i)
        if (rng() % 3 != 0) enabled[s].push_back(i);
      if (enabled[s].empty()) enabled[s].push_back(static_cast<ActionId>(rng() % k));
    }
    d.enabled.push_back(enabled);
  }
  const std::size_t joints = d.actions[0].size() * d.actions[1].size();
  d.transitions.assign(states, std::vector<StateId>(joints));
  for (auto& row : d.transitions)
    for (auto& t : row) t = static_cast<StateId>(rng() % states);
  for (const char* p : {"p", "q"}) {
    std::vector<StateId> members;
    for (StateId s = 0; s < states; ++s)
      if (rng() % 2) members.push_back(s);
    d.propositions[p] = members;
  }
  return Cgm::from_explicit(d);
}

Formula random_formula(std::mt19937& rng, int depth) {
  auto coalition = [&]() {
    std::vector<AgentId> c;
    if (rng() % 2) c.push_back(0);
    if (rng() % 2) c.push_back(1);
    return c;
  };
  auto strategic = [&](Formula::Kind k, std::vector<Formula> args) {
    auto c = coalition();
    std::string label = "c";
    for (AgentId a : c) label += std::to_string(a);
    return Formula::temporal(k, label, c, std::move(args));
  };
  if (depth <= 0 || rng() % 4 == 0) return Formula::atom(rng() % 2 ? "p" : "q");
  switch (rng() % 7) {
    case 0: return Formula::negation(random_formula(rng, depth - 1));
    case 1: return Formula::conjunction(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 2: return Formula::disjunction(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return strategic(Formula::Kind::X, {random_formula(rng, depth - 1)});
    case 4: return strategic(Formula::Kind::F, {random_formula(rng, depth - 1)});
    case 5: return strategic(Formula::Kind::G, {random_formula(rng, depth - 1)});
    default:
      return strategic(Formula::Kind::U, {random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
  }
}

namespace {

// All tuples of enabled actions for `agents` at `s`.
std::vector<std::vector<ActionId>> tuples(const Cgm& cgm, StateId s, const std::vector<AgentId>& agents) {
  std::vector<std::vector<ActionId>> out{{}};
  for (AgentId a : agents) {
    std::vector<std::vector<ActionId>> next;
    for (const auto& t : out)
      for (ActionId x : cgm.enabled(a, s)) {
        auto u = t;
        u.push_back(x);
        next.push_back(u);
      }
    out = std::move(next);
  }
  return out;
}

// exists coalition move, forall counter-moves: pred(successor)
bool controllable(const Cgm& cgm, StateId s, const std::vector<AgentId>& coalition,
                  const std::function<bool(StateId)>& pred) {
  std::vector<AgentId> others;
  for (AgentId a = 0; a < static_cast<AgentId>(cgm.num_agents()); ++a)
    if (std::find(coalition.begin(), coalition.end(), a) == coalition.end()) others.push_back(a);
  for (const auto& mine : tuples(cgm, s, coalition)) {
    bool all = true;
    for (const auto& theirs : tuples(cgm, s, others)) {
      JointAction joint(cgm.num_agents());
      for (std::size_t i = 0; i < coalition.size(); ++i) joint[coalition[i]] = mine[i];
      for (std::size_t i = 0; i < others.size(); ++i) joint[others[i]] = theirs[i];
      if (!pred(cgm.successor(s, joint))) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace

std::vector<bool> satisfying(const Cgm& cgm, const Formula& f) {
  const std::size_t n = cgm.num_states();
  std::vector<bool> out(n);
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom: {
      const auto& set = cgm.proposition(f.name);
      for (StateId s = 0; s < n; ++s) out[s] = set.test(s);
      return out;
    }
    case K::Not: {
      auto a = satisfying(cgm, f.args[0]);
      for (StateId s = 0; s < n; ++s) out[s] = !a[s];
      return out;
    }
    case K::And:
    case K::Or: {
      auto a = satisfying(cgm, f.args[0]);
      auto b = satisfying(cgm, f.args[1]);
      for (StateId s = 0; s < n; ++s) out[s] = f.kind == K::And ? (a[s] && b[s]) : (a[s] || b[s]);
      return out;
    }
    default: break;
  }
  auto phi = satisfying(cgm, f.args[0]);
  if (f.kind == K::X) {
    for (StateId s = 0; s < n; ++s) out[s] = controllable(cgm, s, f.coalition, [&](StateId t) { return phi[t]; });
    return out;
  }
  std::vector<bool> psi = f.kind == K::U ? satisfying(cgm, f.args[1]) : std::vector<bool>{};
  // memo[d][s]: -1 unknown, 0 lose, 1 win with d rounds left
  const std::size_t depth = f.kind == K::G ? n + 1 : n;
  std::vector<std::vector<int>> memo(depth + 1, std::vector<int>(n, -1));
  std::function<bool(StateId, std::size_t)> win = [&](StateId s, std::size_t d) -> bool {
    int& m = memo[d][s];
    if (m >= 0) return m;
    bool r = false;
    switch (f.kind) {
      case K::F:
        r = phi[s] || (d > 0 && controllable(cgm, s, f.coalition, [&](StateId t) { return win(t, d - 1); }));
        break;
      case K::U:
        r = psi[s] || (phi[s] && d > 0 && controllable(cgm, s, f.coalition, [&](StateId t) { return win(t, d - 1); }));
        break;
      case K::G:
        r = phi[s] && (d == 0 || controllable(cgm, s, f.coalition, [&](StateId t) { return win(t, d - 1); }));
        break;
      default: break;
    }
    m = r;
    return r;
  };
  for (StateId s = 0; s < n; ++s) out[s] = win(s, depth);
  return out;
}

namespace {

bool all_counter(const Cgm& cgm, StateId s, const std::vector<AgentId>& coalition, const std::vector<ActionId>& move,
                 const std::function<bool(StateId)>& pred) {
  std::vector<AgentId> others;
  for (AgentId a = 0; a < static_cast<AgentId>(cgm.num_agents()); ++a)
    if (std::find(coalition.begin(), coalition.end(), a) == coalition.end()) others.push_back(a);
  for (std::size_t i = 0; i < coalition.size(); ++i)
    if (!cgm.is_enabled(coalition[i], s, move[i])) return false;
  for (const auto& theirs : tuples(cgm, s, others)) {
    JointAction joint(cgm.num_agents());
    for (std::size_t i = 0; i < coalition.size(); ++i) joint[coalition[i]] = move[i];
    for (std::size_t i = 0; i < others.size(); ++i) joint[others[i]] = theirs[i];
    if (!pred(cgm.successor(s, joint))) return false;
  }
  return true;
}

}  // namespace

bool reach_sound(const Cgm& cgm, const atlforge::StrategyMap& st, StateId start, std::size_t bound) {
  std::map<std::pair<StateId, std::size_t>, bool> memo;
  std::function<bool(StateId, std::size_t)> ok = [&](StateId s, std::size_t d) -> bool {
    if (st.goal.test(s)) return true;
    if (d == 0) return false;
    auto key = std::make_pair(s, d);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto it = st.choice.find(s);
    bool r = it != st.choice.end() &&
             all_counter(cgm, s, st.coalition, it->second, [&](StateId t) { return ok(t, d - 1); });
    memo[key] = r;
    return r;
  };
  return ok(start, bound);
}

bool safety_sound(const Cgm& cgm, const atlforge::StrategyMap& st, const StateSet& safe, StateId start,
                  std::size_t bound) {
  std::map<std::pair<StateId, std::size_t>, bool> memo;
  std::function<bool(StateId, std::size_t)> ok = [&](StateId s, std::size_t d) -> bool {
    if (!safe.test(s)) return false;
    if (d == 0) return true;
    auto key = std::make_pair(s, d);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto it = st.choice.find(s);
    bool r = it != st.choice.end() &&
             all_counter(cgm, s, st.coalition, it->second, [&](StateId t) { return ok(t, d - 1); });
    memo[key] = r;
    return r;
  };
  return ok(start, bound);
}

bool cooperative_reach_then_step(const Cgm& cgm, StateId start, const StateSet& goal, const StateSet& after) {
  std::vector<AgentId> everyone;
  for (AgentId a = 0; a < static_cast<AgentId>(cgm.num_agents()); ++a) everyone.push_back(a);
  std::vector<bool> seen(cgm.num_states(), false);
  std::deque<StateId> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    const auto moves = tuples(cgm, s, everyone);
    if (goal.test(s)) {
      for (const auto& m : moves)
        if (after.test(cgm.successor(s, m))) return true;
    }
    for (const auto& m : moves) {
      StateId t = cgm.successor(s, m);
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    }
  }
  return false;
}

bool cooperative_body_reaches(const Cgm& cgm, StateId start, AgentId agent, const std::vector<ActionId>& body,
                              const StateSet& target) {
  std::vector<AgentId> others;
  for (AgentId a = 0; a < static_cast<AgentId>(cgm.num_agents()); ++a)
    if (a != agent) others.push_back(a);
  std::set<StateId> frontier{start};
  for (ActionId x : body) {
    std::set<StateId> next;
    for (StateId s : frontier) {
      if (!cgm.is_enabled(agent, s, x)) continue;
      for (const auto& theirs : tuples(cgm, s, others)) {
        JointAction joint(cgm.num_agents());
        joint[agent] = x;
        for (std::size_t i = 0; i < others.size(); ++i) joint[others[i]] = theirs[i];
        next.insert(cgm.successor(s, joint));
      }
    }
    frontier = std::move(next);
  }
  return std::any_of(frontier.begin(), frontier.end(), [&](StateId s) { return target.test(s); });
}

std::size_t belief_count(const std::vector<int>& domain_sizes) {
  std::size_t total = 1;
  for (int l : domain_sizes) {
    std::size_t subsets = 1;
    for (int i = 0; i < l; ++i) subsets *= 2;
    total *= subsets - 1;
  }
  return total;
}

std::string source_path(const std::string& relative) { return std::string(ATLFORGE_SOURCE_DIR) + "/" + relative; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle
