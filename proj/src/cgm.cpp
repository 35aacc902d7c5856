#include "atlforge/cgm.hpp"

#include <algorithm>
#include <sstream>

#include "atlforge/error.hpp"

namespace atlforge {

namespace {

constexpr std::size_t kMaxStates = std::size_t{1} << 24;

std::vector<std::size_t> weights_for(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> w(sizes.size(), 1);
  for (std::size_t i = sizes.size(); i-- > 1;) w[i - 1] = w[i] * sizes[i];
  return w;
}

}  // namespace

int evaluate(const Expr& e, std::span<const int> values, std::span<const ActionId> joint) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::IntLit:
    case K::BoolLit: return e.value;
    case K::Var: return values[e.value];
    case K::ActionIs:
      if (joint.empty()) throw Error("action test evaluated without a joint action");
      return joint[e.value] == e.action;
    case K::Not: return !evaluate(e.args[0], values, joint);
    case K::Neg: return -evaluate(e.args[0], values, joint);
    case K::And: return evaluate(e.args[0], values, joint) && evaluate(e.args[1], values, joint);
    case K::Or: return evaluate(e.args[0], values, joint) || evaluate(e.args[1], values, joint);
    default: break;
  }
  int a = evaluate(e.args[0], values, joint);
  int b = evaluate(e.args[1], values, joint);
  switch (e.kind) {
    case K::Add: return a + b;
    case K::Sub: return a - b;
    case K::Eq: return a == b;
    case K::Ne: return a != b;
    case K::Lt: return a < b;
    case K::Le: return a <= b;
    case K::Gt: return a > b;
    case K::Ge: return a >= b;
    default: throw Error("malformed expression");
  }
}

std::optional<AgentId> Cgm::find_agent(std::string_view name) const {
  for (AgentId a = 0; a < static_cast<AgentId>(agent_names_.size()); ++a)
    if (agent_names_[a] == name) return a;
  return std::nullopt;
}

std::span<const ActionId> Cgm::enabled(AgentId a, StateId s) const { return enabled_.at(a).at(s); }

bool Cgm::is_enabled(AgentId a, StateId s, ActionId act) const {
  auto en = enabled(a, s);
  return std::binary_search(en.begin(), en.end(), act);
}

JointAction Cgm::decode_joint(std::size_t index) const {
  JointAction j(num_agents());
  for (std::size_t a = 0; a < j.size(); ++a) {
    j[a] = static_cast<ActionId>(index / joint_weight_[a]);
    index %= joint_weight_[a];
  }
  return j;
}

std::size_t Cgm::encode_joint(std::span<const ActionId> joint) const {
  if (joint.size() != num_agents()) throw Error("joint action has wrong arity");
  std::size_t index = 0;
  for (std::size_t a = 0; a < joint.size(); ++a) {
    if (joint[a] < 0 || joint[a] >= static_cast<ActionId>(actions_[a].size())) throw Error("action out of range");
    index += static_cast<std::size_t>(joint[a]) * joint_weight_[a];
  }
  return index;
}

StateId Cgm::successor(StateId s, std::span<const ActionId> joint) const {
  for (std::size_t a = 0; a < joint.size() && a < num_agents(); ++a) {
    if (!is_enabled(static_cast<AgentId>(a), s, joint[a])) {
      throw StrategyError("action '" + actions_[a].at(joint[a]) + "' of agent " + agent_names_[a] +
                          " is not enabled in state s" + std::to_string(s));
    }
  }
  auto next = transition(s, encode_joint(joint));
  if (next < 0) throw StrategyError("joint action disabled in state s" + std::to_string(s));
  return static_cast<StateId>(next);
}

std::vector<int> Cgm::decode(StateId s) const {
  std::vector<int> values(variables_.size());
  std::size_t rest = s;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    values[v] = variables_[v].domain.lo + static_cast<int>(rest / radix_weight_[v]);
    rest %= radix_weight_[v];
  }
  return values;
}

StateId Cgm::encode(std::span<const int> values) const {
  if (values.size() != variables_.size()) throw Error("assignment has wrong arity");
  std::size_t index = 0;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (!variables_[v].domain.contains(values[v])) throw Error("value out of domain for " + variables_[v].name);
    index += static_cast<std::size_t>(values[v] - variables_[v].domain.lo) * radix_weight_[v];
  }
  return static_cast<StateId>(index);
}

int Cgm::value(StateId s, VarId v) const {
  return variables_.at(v).domain.lo + static_cast<int>((s / radix_weight_[v]) % variables_[v].domain.size());
}

std::string Cgm::format_state(StateId s) const {
  std::ostringstream os;
  auto values = decode(s);
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (v) os << ' ';
    if (spec_) {
      os << spec_->qualified_name(static_cast<VarId>(v)) << '=' << spec_->format_value(static_cast<VarId>(v), values[v]);
    } else {
      os << variables_[v].name << '=' << values[v];
    }
  }
  return os.str();
}

bool Cgm::has_proposition(std::string_view name) const { return props_.find(name) != props_.end(); }

const StateSet& Cgm::proposition(std::string_view name) const {
  auto it = props_.find(name);
  if (it == props_.end()) throw Error("unknown proposition '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> Cgm::proposition_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : props_) out.push_back(name);
  return out;
}

Cgm Cgm::from_explicit(const Explicit& d) {
  if (d.agents.empty()) throw Error("explicit model needs at least one agent");
  if (d.num_states < 2) throw Error("explicit model needs at least two states");
  Cgm m;
  m.variables_ = {VarDecl{"state", Domain{false, 0, static_cast<int>(d.num_states) - 1}, kEnvironment}};
  m.radix_weight_ = {1};
  m.num_states_ = d.num_states;
  m.agent_names_ = d.agents;
  m.actions_ = d.actions;
  std::vector<std::size_t> sizes;
  for (const auto& acts : d.actions) {
    if (acts.empty()) throw Error("agent without actions");
    sizes.push_back(acts.size());
    m.num_joint_ *= acts.size();
  }
  m.joint_weight_ = weights_for(sizes);
  m.enabled_.assign(m.num_agents(), std::vector<std::vector<ActionId>>(d.num_states));
  for (AgentId a = 0; a < static_cast<AgentId>(m.num_agents()); ++a) {
    for (StateId s = 0; s < d.num_states; ++s) {
      std::vector<ActionId> en;
      if (a < static_cast<AgentId>(d.enabled.size()) && s < d.enabled[a].size()) en = d.enabled[a][s];
      if (en.empty()) {
        for (ActionId x = 0; x < static_cast<ActionId>(m.actions_[a].size()); ++x) en.push_back(x);
      }
      std::sort(en.begin(), en.end());
      m.enabled_[a][s] = std::move(en);
    }
  }
  m.table_.assign(d.num_states * m.num_joint_, -1);
  for (StateId s = 0; s < d.num_states; ++s) {
    for (std::size_t j = 0; j < m.num_joint_; ++j) {
      JointAction joint = m.decode_joint(j);
      bool ok = true;
      for (std::size_t a = 0; a < joint.size(); ++a) ok = ok && m.is_enabled(static_cast<AgentId>(a), s, joint[a]);
      if (!ok) continue;
      StateId next = d.transitions.at(s).at(j);
      if (next >= d.num_states) throw Error("transition target out of range");
      m.table_[s * m.num_joint_ + j] = next;
    }
  }
  for (const auto& [name, states] : d.propositions) {
    StateSet set(d.num_states);
    for (StateId s : states) set.set(s);
    m.props_.emplace(name, std::move(set));
  }
  m.observed_.assign(m.num_agents(), {});
  return m;
}

Cgm build_cgm(const ModelSpec& spec, const std::map<VarId, int>& agent_init) {
  Cgm m;
  m.spec_ = std::make_shared<const ModelSpec>(spec);
  m.variables_ = spec.variables;
  std::vector<std::size_t> sizes;
  std::size_t total = 1;
  for (const auto& v : spec.variables) {
    sizes.push_back(static_cast<std::size_t>(v.domain.size()));
    total *= sizes.back();
    if (total > kMaxStates) throw ModelError("state space exceeds " + std::to_string(kMaxStates) + " states");
  }
  m.radix_weight_ = weights_for(sizes);
  m.num_states_ = total;

  for (const auto& a : spec.agents) {
    m.agent_names_.push_back(a.name);
    m.actions_.push_back(a.actions);
    m.num_joint_ *= a.actions.size();
  }
  std::vector<std::size_t> action_sizes;
  for (const auto& acts : m.actions_) action_sizes.push_back(acts.size());
  m.joint_weight_ = weights_for(action_sizes);

  for (AgentId a = 0; a < static_cast<AgentId>(spec.agents.size()); ++a) {
    m.observed_.push_back(spec.agents[a].locals);
    for (VarId v : spec.agents[a].locals) {
      auto it = agent_init.find(v);
      if (it == agent_init.end()) throw Error("no initial value for agent variable " + spec.qualified_name(v));
      if (!spec.variables[v].domain.contains(it->second)) {
        throw Error("initial value out of domain for " + spec.qualified_name(v));
      }
      m.local_init_[v] = it->second;
    }
  }
  for (const auto& [v, _] : agent_init) {
    if (v < 0 || v >= static_cast<VarId>(spec.variables.size()) || spec.variables[v].owner == kEnvironment) {
      throw Error("initial values may only be given for agent variables");
    }
  }

  for (const auto& p : spec.propositions) m.props_.emplace(p.name, StateSet(total));

  // Rules tagged with their owner for diagnostics.
  struct TaggedRule {
    const EvolutionRule* rule;
    std::string label;
  };
  std::vector<TaggedRule> rules;
  for (std::size_t i = 0; i < spec.env_evolution.size(); ++i) {
    rules.push_back({&spec.env_evolution[i], "Environment evolution rule " + std::to_string(i + 1)});
  }
  for (const auto& a : spec.agents) {
    for (std::size_t i = 0; i < a.evolution.size(); ++i) {
      rules.push_back({&a.evolution[i], a.name + " evolution rule " + std::to_string(i + 1)});
    }
  }

  m.enabled_.assign(m.num_agents(), std::vector<std::vector<ActionId>>(total));
  m.table_.assign(total * m.num_joint_, -1);
  std::vector<int> next(spec.variables.size());
  std::vector<int> writer(spec.variables.size());
  for (StateId s = 0; s < total; ++s) {
    const std::vector<int> values = m.decode(s);
    for (std::size_t p = 0; p < spec.propositions.size(); ++p) {
      if (evaluate(spec.propositions[p].condition, values)) m.props_.at(spec.propositions[p].name).set(s);
    }
    for (AgentId a = 0; a < static_cast<AgentId>(spec.agents.size()); ++a) {
      const auto& agent = spec.agents[a];
      std::vector<ActionId> en;
      if (!agent.protocol) {
        for (ActionId x = 0; x < static_cast<ActionId>(agent.actions.size()); ++x) en.push_back(x);
      } else {
        const ProtocolRule* other = nullptr;
        bool matched = false;
        for (const auto& rule : *agent.protocol) {
          if (!rule.condition) {
            other = &rule;
            continue;
          }
          if (evaluate(*rule.condition, values)) {
            matched = true;
            en.insert(en.end(), rule.actions.begin(), rule.actions.end());
          }
        }
        if (!matched && other) en = other->actions;
        std::sort(en.begin(), en.end());
        en.erase(std::unique(en.begin(), en.end()), en.end());
      }
      if (en.empty()) throw ModelError("protocol of agent " + agent.name + " enables no action in state " + m.format_state(s));
      m.enabled_[a][s] = std::move(en);
    }
    for (std::size_t j = 0; j < m.num_joint_; ++j) {
      JointAction joint = m.decode_joint(j);
      bool ok = true;
      for (std::size_t a = 0; a < joint.size() && ok; ++a) ok = m.is_enabled(static_cast<AgentId>(a), s, joint[a]);
      if (!ok) continue;
      next = values;
      std::fill(writer.begin(), writer.end(), -1);
      for (std::size_t r = 0; r < rules.size(); ++r) {
        const EvolutionRule& rule = *rules[r].rule;
        if (!evaluate(rule.condition, values, joint)) continue;
        for (const auto& asg : rule.assignments) {
          int v = evaluate(asg.value, values, joint);
          const auto& decl = spec.variables[asg.target];
          if (!decl.domain.contains(v)) {
            throw ModelError(rules[r].label + " assigns " + spec.qualified_name(asg.target) + " = " + std::to_string(v) +
                             ", outside its domain, in state " + m.format_state(s));
          }
          int& w = writer[asg.target];
          if (w >= 0 && next[asg.target] != v) {
            std::string joint_text;
            for (std::size_t a = 0; a < joint.size(); ++a) joint_text += (a ? "," : "") + m.actions_[a][joint[a]];
            throw ModelError("nondeterministic evolution: " + rules[w].label + " and " + rules[r].label +
                             " assign different values to " + spec.qualified_name(asg.target) + " in state " +
                             m.format_state(s) + " under joint action (" + joint_text + ")");
          }
          w = static_cast<int>(r);
          next[asg.target] = v;
        }
      }
      m.table_[s * m.num_joint_ + j] = m.encode(next);
    }
  }
  return m;
}

std::string BeliefState::key() const {
  std::map<VarId, std::vector<int>> all;
  for (const auto& [v, x] : fixed) all[v] = {x};
  for (const auto& [v, x] : known) all[v] = {x};
  for (const auto& [v, xs] : possible) all[v] = xs;
  std::string out;
  for (const auto& [v, xs] : all) {
    out += std::to_string(v) + "={";
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
    out += "};";
  }
  return out;
}

std::vector<int> BeliefState::values_of(VarId v) const {
  if (auto it = fixed.find(v); it != fixed.end()) return {it->second};
  if (auto it = known.find(v); it != known.end()) return {it->second};
  if (auto it = possible.find(v); it != possible.end()) return it->second;
  return {};
}

StateSet belief_states(const Cgm& cgm, const BeliefState& belief) {
  const auto& vars = cgm.variables();
  std::vector<std::vector<int>> choices(vars.size());
  for (VarId v = 0; v < static_cast<VarId>(vars.size()); ++v) {
    if (vars[v].owner != kEnvironment) {
      auto it = cgm.local_init().find(v);
      if (it != cgm.local_init().end()) {
        choices[v] = {it->second};
      } else {
        for (int x = vars[v].domain.lo; x <= vars[v].domain.hi; ++x) choices[v].push_back(x);
      }
      continue;
    }
    for (int x : belief.values_of(v)) {
      if (vars[v].domain.contains(x)) choices[v].push_back(x);
    }
  }
  StateSet out = cgm.empty_set();
  for (const auto& c : choices)
    if (c.empty()) return out;
  std::vector<std::size_t> cursor(vars.size(), 0);
  std::vector<int> values(vars.size());
  while (true) {
    for (std::size_t v = 0; v < vars.size(); ++v) values[v] = choices[v][cursor[v]];
    out.set(cgm.encode(values));
    std::size_t k = vars.size();
    while (k > 0) {
      --k;
      if (++cursor[k] < choices[k].size()) break;
      cursor[k] = 0;
      if (k == 0) return out;
    }
    if (vars.empty()) return out;
  }
}

void dump_cgm(const Cgm& cgm, std::ostream& os) {
  for (StateId s = 0; s < cgm.num_states(); ++s) os << 's' << s << ": " << cgm.format_state(s) << '\n';
  for (StateId s = 0; s < cgm.num_states(); ++s) {
    for (std::size_t j = 0; j < cgm.num_joint(); ++j) {
      auto t = cgm.transition(s, j);
      if (t < 0) continue;
      JointAction joint = cgm.decode_joint(j);
      os << 's' << s << " --(";
      for (std::size_t a = 0; a < joint.size(); ++a) os << (a ? "," : "") << cgm.actions(static_cast<AgentId>(a))[joint[a]];
      os << ")--> s" << t << '\n';
    }
  }
}

}  // namespace atlforge
