#include "atlforge/runtime.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "atlforge/error.hpp"

namespace atlforge {
namespace {

constexpr Cell kDirections[4] = {{-1, 0}, {1, 0}, {0, 1}, {0, -1}};  // N S E W

Cell operator+(Cell a, Cell b) { return {a.row + b.row, a.col + b.col}; }

Cell move(const GridMap& map, Cell from, std::string_view action) {
  Cell d{0, 0};
  if (action == "right") d = {0, 1};
  else if (action == "left") d = {0, -1};
  else if (action == "up") d = {-1, 0};
  else if (action == "down") d = {1, 0};
  Cell to = from + d;
  return map.walkable(to) ? to : from;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::optional<Cell> parse_cell(std::string_view text) {
  auto comma = text.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    std::string r(text.substr(0, comma)), c(text.substr(comma + 1));
    Cell cell{std::stoi(r, &used), 0};
    if (used != r.size()) return std::nullopt;
    cell.col = std::stoi(c, &used);
    if (used != c.size()) return std::nullopt;
    return cell;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string format_values(const Hull& hull, const std::string& name, const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += i ? " " : "";
    out += hull.boolean(name) ? (xs[i] ? "true" : "false") : std::to_string(xs[i]);
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(Cell c) { return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")"; }

std::vector<Cell> GridMap::walkable_cells() const {
  std::vector<Cell> out;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (walkable({r, c})) out.push_back({r, c});
  return out;
}

GridMap GridMap::goldseeker() { return GridMap{4, 3, {{1, 1}, {2, 1}}, {3, 2}}; }

std::vector<Cell> line_of_sight(const GridMap& map, Cell from) {
  std::vector<Cell> out{from};
  for (Cell d : kDirections) {
    for (Cell c = from + d; map.inside(c); c = c + d) {
      out.push_back(c);
      if (map.obstacle(c)) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Percept::str() const {
  auto side = [](Side s) { return s == Side::Open ? "open" : s == Side::Obstacle ? "obstacle" : "edge"; };
  std::string out = std::string("N=") + side(north) + " S=" + side(south) + " E=" + side(east) + " W=" + side(west);
  for (const auto& s : seen) out += " " + s.what + "@" + std::to_string(s.drow) + "," + std::to_string(s.dcol);
  if (treasure_mined) out += " mined";
  return out;
}

const std::vector<int>* Hull::find(std::string_view name) const {
  for (const auto& [n, xs] : vars)
    if (n == name) return &xs;
  return nullptr;
}

const std::vector<std::string>& GridWorld::action_names() {
  static const std::vector<std::string> names{"right", "left", "up", "down", "mine"};
  return names;
}

GridWorld::GridWorld(GridMap map, std::vector<std::string> agents) : map_(std::move(map)), agents_(std::move(agents)) {
  if (agents_.size() != 2) throw Error("the grid world needs exactly two agents");
  if (!map_.walkable(map_.treasure)) throw Error("treasure must lie on a walkable cell");
  for (Cell c : map_.obstacles)
    if (!map_.inside(c)) throw Error("obstacle " + to_string(c) + " lies outside the map");
}

std::optional<std::size_t> GridWorld::find_agent(std::string_view name) const {
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i] == name) return i;
  return std::nullopt;
}

WorldState GridWorld::step(const WorldState& w, const std::vector<std::optional<std::string>>& actions) const {
  WorldState next = w;
  bool all_mine = true;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& a = actions.at(i);
    if (a && std::find(action_names().begin(), action_names().end(), *a) == action_names().end())
      throw RuntimeFailure("unknown action '" + *a + "' for " + agents_[i]);
    const bool mines = a && *a == "mine" && !w.mined[i];
    all_mine = all_mine && mines && w.pos[i] == map_.treasure;
    if (mines) next.mined[i] = true;
    if (a) next.pos[i] = move(map_, w.pos[i], *a);
  }
  if (all_mine) next.treasure_mined = true;
  return next;
}

Percept GridWorld::perceive(const WorldState& w, std::size_t observer) const {
  Percept p;
  const Cell at = w.pos.at(observer);
  auto side = [&](Cell d) {
    Cell c = at + d;
    if (!map_.inside(c)) return Percept::Side::Edge;
    return map_.obstacle(c) ? Percept::Side::Obstacle : Percept::Side::Open;
  };
  p.north = side(kDirections[0]);
  p.south = side(kDirections[1]);
  p.east = side(kDirections[2]);
  p.west = side(kDirections[3]);
  for (Cell c : line_of_sight(map_, at)) {
    for (std::size_t i = 0; i < agents_.size(); ++i)
      if (i != observer && w.pos[i] == c) p.seen.push_back({agents_[i], c.row - at.row, c.col - at.col});
    if (c == map_.treasure) p.seen.push_back({"treasure", c.row - at.row, c.col - at.col});
  }
  std::sort(p.seen.begin(), p.seen.end());
  p.treasure_mined = w.treasure_mined;
  return p;
}

AgentBelief GridWorld::initial_belief(std::size_t observer, const Percept& percept) const {
  AgentBelief out;
  const auto cells = map_.walkable_cells();
  WorldState w{std::vector<Cell>(agents_.size()), std::vector<bool>(agents_.size(), false), false};
  for (Cell a : cells) {
    for (Cell b : cells) {
      w.pos = {a, b};
      if (perceive(w, observer) == percept) out.insert(w);
    }
  }
  if (out.empty()) throw RuntimeFailure(agents_[observer] + ": no world is consistent with the first percept");
  return out;
}

AgentBelief GridWorld::update_belief(const AgentBelief& belief, std::size_t observer,
                                     const std::optional<std::string>& own_action, const Percept& percept) const {
  std::vector<std::optional<std::string>> options{std::nullopt};
  for (const auto& a : action_names()) options.emplace_back(a);
  AgentBelief out;
  std::vector<std::optional<std::string>> joint(agents_.size());
  for (const WorldState& w : belief) {
    // Two agents: one observer, one partner whose action is unknown.
    const std::size_t other = 1 - observer;
    joint[observer] = own_action;
    for (const auto& opt : options) {
      if (opt && *opt == "mine" && w.mined[other]) continue;
      joint[other] = opt;
      WorldState next = step(w, joint);
      if (perceive(next, observer) == percept) out.insert(std::move(next));
    }
  }
  if (out.empty()) throw RuntimeFailure(agents_[observer] + ": percept contradicts every candidate world");
  return out;
}

Hull GridWorld::project_hull(const AgentBelief& belief) const {
  if (belief.empty()) throw RuntimeFailure("cannot project an empty belief");
  std::set<int> mined;
  std::vector<std::set<int>> rows(agents_.size()), cols(agents_.size());
  for (const auto& w : belief) {
    mined.insert(w.treasure_mined ? 1 : 0);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      rows[i].insert(w.pos[i].row);
      cols[i].insert(w.pos[i].col);
    }
  }
  Hull h;
  h.vars.emplace_back("treasureMined", std::vector<int>(mined.begin(), mined.end()));
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    h.vars.emplace_back("row" + agents_[i], std::vector<int>(rows[i].begin(), rows[i].end()));
    h.vars.emplace_back("column" + agents_[i], std::vector<int>(cols[i].begin(), cols[i].end()));
  }
  return h;
}

std::optional<std::string> GridWorld::disagreement_with(const Cgm& cgm) const {
  const auto& vars = cgm.variables();
  auto var = [&](const std::string& name, AgentId owner) -> VarId {
    for (VarId v = 0; v < static_cast<VarId>(vars.size()); ++v)
      if (vars[v].name == name && vars[v].owner == owner) return v;
    throw Error("model has no variable " + name);
  };
  std::vector<VarId> row, col, mined;
  std::vector<AgentId> ids;
  for (const auto& name : agents_) {
    auto id = cgm.find_agent(name);
    if (!id) throw Error("model has no agent " + name);
    ids.push_back(*id);
    row.push_back(var("row" + name, kEnvironment));
    col.push_back(var("column" + name, kEnvironment));
    mined.push_back(var("mined", *id));
  }
  const VarId treasure = var("treasureMined", kEnvironment);
  auto to_world = [&](StateId s) {
    WorldState w{std::vector<Cell>(agents_.size()), std::vector<bool>(agents_.size()), cgm.value(s, treasure) != 0};
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      w.pos[i] = {cgm.value(s, row[i]), cgm.value(s, col[i])};
      w.mined[i] = cgm.value(s, mined[i]) != 0;
    }
    return w;
  };
  for (StateId s = 0; s < cgm.num_states(); ++s) {
    WorldState w = to_world(s);
    if (!std::all_of(w.pos.begin(), w.pos.end(), [&](Cell c) { return map_.walkable(c); })) continue;
    for (std::size_t j = 0; j < cgm.num_joint(); ++j) {
      auto t = cgm.transition(s, j);
      if (t < 0) continue;
      JointAction joint = cgm.decode_joint(j);
      std::vector<std::optional<std::string>> named(agents_.size());
      for (std::size_t i = 0; i < agents_.size(); ++i) named[i] = cgm.actions(ids[i])[joint[ids[i]]];
      if (step(w, named) != to_world(static_cast<StateId>(t))) {
        std::string acts;
        for (const auto& a : named) acts += (acts.empty() ? "" : ",") + *a;
        return "state " + cgm.format_state(s) + " under (" + acts + ")";
      }
    }
  }
  return std::nullopt;
}

std::vector<GuardAtom> hull_guard(const Hull& hull) {
  std::vector<std::pair<std::string, const std::pair<std::string, std::vector<int>>*>> known, possible;
  for (const auto& entry : hull.vars) (entry.second.size() == 1 ? known : possible).emplace_back(lower(entry.first), &entry);
  std::stable_sort(known.begin(), known.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::stable_sort(possible.begin(), possible.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<GuardAtom> out;
  auto text = [&](const std::string& name, int x) {
    return hull.boolean(name) ? std::string(x ? "true" : "false") : std::to_string(x);
  };
  for (const auto& [low, e] : known) out.push_back({GuardAtom::Kind::Known, low, text(e->first, e->second[0])});
  for (const auto& [low, e] : possible)
    for (int x : e->second) out.push_back({GuardAtom::Kind::Possible, low, text(e->first, x)});
  return out;
}

PlanLibrary::PlanLibrary(std::vector<Plan> plans) : plans_(std::move(plans)) {
  for (std::size_t i = 0; i < plans_.size(); ++i) index_[plans_[i].goal + "|" + guard_key(plans_[i].guard)].push_back(i);
}

const Plan& PlanLibrary::select(const std::string& goal, const Hull& hull) const {
  return select(goal, hull_guard(hull));
}

const Plan& PlanLibrary::select(const std::string& goal, std::span<const GuardAtom> guard) const {
  auto it = index_.find(goal + "|" + guard_key(guard));
  if (it == index_.end()) throw RuntimeFailure("no plan for goal '" + goal + "' matches " + format_guard(guard));
  if (it->second.size() > 1)
    throw RuntimeFailure(std::to_string(it->second.size()) + " plans for goal '" + goal + "' match " + format_guard(guard));
  return plans_[it->second.front()];
}

std::optional<std::string> PlanLibrary::first_goal() const {
  if (plans_.empty()) return std::nullopt;
  return plans_.front().goal;
}

ReplayScript parse_replay_script(std::string_view text) {
  ReplayScript script;
  std::string section;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (words.size() == 1 && words[0].size() > 2 && words[0].front() == '[' && words[0].back() == ']') {
      section = words[0].substr(1, words[0].size() - 2);
      if (section != "expect") script.actions[section];
      continue;
    }
    if (section.empty()) throw ParseError(line_no, 1, "entry outside of any section");
    if (section != "expect") {
      if (words.size() != 1) throw ParseError(line_no, 1, "expected one action per line");
      script.actions[section].push_back(words[0]);
      continue;
    }
    ReplayScript::Expectation e;
    e.line = line_no;
    if (words.size() < 4) throw ParseError(line_no, 1, "expectation needs a step, an agent, a kind and arguments");
    try {
      std::size_t used = 0;
      e.step = std::stoul(words[0], &used);
      if (used != words[0].size() || e.step == 0) throw std::invalid_argument("step");
    } catch (const std::exception&) {
      throw ParseError(line_no, 1, "invalid step number '" + words[0] + "'");
    }
    e.agent = words[1];
    const std::string& kind = words[2];
    if (kind == "hull") e.kind = ReplayScript::Expectation::Kind::Hull;
    else if (kind == "excludes") e.kind = ReplayScript::Expectation::Kind::Excludes;
    else if (kind == "at") e.kind = ReplayScript::Expectation::Kind::At;
    else if (kind == "cells") e.kind = ReplayScript::Expectation::Kind::Cells;
    else throw ParseError(line_no, 1, "unknown expectation kind '" + kind + "'");
    std::size_t first_value = 3;
    if (e.kind != ReplayScript::Expectation::Kind::At) {
      e.subject = words[3];
      first_value = 4;
    }
    e.values.assign(words.begin() + first_value, words.end());
    if (e.values.empty() && e.kind != ReplayScript::Expectation::Kind::Cells)
      throw ParseError(line_no, 1, "expectation lists no values");
    if (e.kind == ReplayScript::Expectation::Kind::At || e.kind == ReplayScript::Expectation::Kind::Cells) {
      for (const auto& v : e.values)
        if (!parse_cell(v)) throw ParseError(line_no, 1, "expected a cell as row,col but found '" + v + "'");
    }
    script.expectations.push_back(std::move(e));
  }
  return script;
}

Trace run_episode(const GridWorld& world, std::vector<AgentSetup> setups, Mode mode, const ReplayScript* script,
                  std::size_t max_steps) {
  const std::size_t n = world.agents().size();
  Trace trace;
  trace.agents = world.agents();
  if (mode == Mode::Replay && !script) throw Error("replay mode needs a script");

  // Order the setups like the world's agents.
  std::vector<AgentSetup> agents(n);
  std::vector<bool> seen(n, false);
  for (auto& s : setups) {
    auto i = world.find_agent(s.name);
    if (!i) throw Error("unknown agent '" + s.name + "'");
    if (seen[*i]) throw Error("agent '" + s.name + "' configured twice");
    seen[*i] = true;
    agents[*i] = std::move(s);
  }
  WorldState w{std::vector<Cell>(n), std::vector<bool>(n, false), false};
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw Error("no start given for agent '" + world.agents()[i] + "'");
    if (!world.map().walkable(agents[i].start))
      throw Error("start " + to_string(agents[i].start) + " of " + agents[i].name + " is not a walkable cell");
    w.pos[i] = agents[i].start;
    if (agents[i].goal.empty()) agents[i].goal = agents[i].library.first_goal().value_or("");
  }
  std::size_t replay_length = 0;
  if (mode == Mode::Replay) {
    for (const auto& [name, acts] : script->actions) {
      if (!world.find_agent(name)) throw Error("script section for unknown agent '" + name + "'");
      replay_length = std::max(replay_length, acts.size());
    }
  }

  std::vector<AgentBelief> beliefs(n);
  std::vector<std::optional<Hull>> last_hull(n);
  std::vector<std::optional<Plan>> plan(n);
  std::vector<std::size_t> cursor(n, 0);
  std::vector<std::optional<std::string>> last_action(n);

  for (std::size_t k = 1;; ++k) {
    TraceStep ts;
    ts.index = k;
    ts.world = w;
    ts.agents.resize(n);
    try {
      for (std::size_t i = 0; i < n; ++i) {
        AgentStep& as = ts.agents[i];
        as.percept = world.perceive(w, i);
        beliefs[i] = k == 1 ? world.initial_belief(i, as.percept)
                            : world.update_belief(beliefs[i], i, last_action[i], as.percept);
        if (!beliefs[i].contains(w)) throw RuntimeFailure(world.agents()[i] + " lost track of the true world");
        as.worlds = beliefs[i].size();
        as.hull = world.project_hull(beliefs[i]);
        for (const auto& b : beliefs[i])
          for (std::size_t j = 0; j < n; ++j) as.cells[world.agents()[j]].insert(b.pos[j]);
      }
      const bool stop = w.treasure_mined || k > max_steps || (mode == Mode::Replay && k > replay_length);
      if (!stop) {
        std::vector<std::optional<std::string>> actions(n);
        for (std::size_t i = 0; i < n; ++i) {
          AgentStep& as = ts.agents[i];
          const bool use_library = mode == Mode::Closed || agents[i].library.size() > 0;
          if (use_library && (!last_hull[i] || *last_hull[i] != as.hull)) {
            plan[i] = agents[i].library.select(agents[i].goal, as.hull);
            cursor[i] = 0;
            as.reselected = true;
          }
          last_hull[i] = as.hull;
          if (mode == Mode::Replay) {
            auto it = script->actions.find(world.agents()[i]);
            if (it != script->actions.end() && k - 1 < it->second.size()) actions[i] = it->second[k - 1];
          } else {
            while (cursor[i] >= plan[i]->body.size()) {
              if (!plan[i]->successor)
                throw RuntimeFailure(world.agents()[i] + " exhausted its plan for goal '" + plan[i]->goal +
                                     "' without reaching it");
              agents[i].goal = *plan[i]->successor;
              plan[i] = agents[i].library.select(agents[i].goal, as.hull);
              cursor[i] = 0;
              as.reselected = true;
            }
            actions[i] = plan[i]->body[cursor[i]];
          }
          as.plan = plan[i];
          if (mode == Mode::Closed && plan[i]) ++cursor[i];
          as.cursor = cursor[i];
          as.action = actions[i];
        }
        w = world.step(w, actions);
        last_action = actions;
      }
      trace.steps.push_back(std::move(ts));
      if (stop) break;
    } catch (const RuntimeFailure& e) {
      trace.steps.push_back(std::move(ts));
      trace.failure = e.what();
      break;
    }
  }
  trace.treasure_mined = w.treasure_mined;
  return trace;
}

void write_trace(const Trace& trace, std::ostream& os) {
  for (const auto& ts : trace.steps) {
    os << "step " << ts.index << "\n  world:";
    for (std::size_t i = 0; i < trace.agents.size(); ++i) {
      os << ' ' << trace.agents[i] << '=' << to_string(ts.world.pos[i]) << (ts.world.mined[i] ? "*" : "");
    }
    os << " treasureMined=" << (ts.world.treasure_mined ? "true" : "false") << '\n';
    for (std::size_t i = 0; i < trace.agents.size(); ++i) {
      const auto& as = ts.agents[i];
      const std::string& name = trace.agents[i];
      os << "  " << name << " percept: " << as.percept.str() << '\n';
      os << "  " << name << " hull: " << format_guard(hull_guard(as.hull)) << " (" << as.worlds << " worlds)\n";
      os << "  " << name << " plan: ";
      if (as.plan) {
        os << '!' << as.plan->goal << (as.reselected ? " (new)" : "") << ':';
        std::size_t from = as.action && as.cursor > 0 ? as.cursor - 1 : as.cursor;
        for (std::size_t b = from; b < as.plan->body.size(); ++b) os << ' ' << as.plan->body[b] << ';';
        os << (as.plan->successor ? " !" + *as.plan->successor : std::string(" true"));
      } else {
        os << "none";
      }
      os << '\n' << "  " << name << " act: " << (as.action ? *as.action : std::string("-")) << '\n';
    }
  }
  if (trace.failure) {
    os << "result: failure: " << *trace.failure << '\n';
  } else if (trace.treasure_mined) {
    os << "result: treasure mined after " << (trace.steps.empty() ? 0 : trace.steps.size() - 1) << " steps\n";
  } else {
    os << "result: stopped without mining\n";
  }
}

std::vector<std::string> check_expectations(const Trace& trace, const ReplayScript& script) {
  using Kind = ReplayScript::Expectation::Kind;
  std::vector<std::string> failures;
  for (const auto& e : script.expectations) {
    const std::string where = "line " + std::to_string(e.line) + ": ";
    auto step = std::find_if(trace.steps.begin(), trace.steps.end(), [&](const TraceStep& t) { return t.index == e.step; });
    auto agent = std::find(trace.agents.begin(), trace.agents.end(), e.agent);
    if (step == trace.steps.end()) {
      failures.push_back(where + "perception " + std::to_string(e.step) + " never happened");
      continue;
    }
    if (agent == trace.agents.end()) {
      failures.push_back(where + "unknown agent '" + e.agent + "'");
      continue;
    }
    const std::size_t i = agent - trace.agents.begin();
    const AgentStep& as = step->agents[i];
    switch (e.kind) {
      case Kind::Hull:
      case Kind::Excludes: {
        const auto* xs = as.hull.find(e.subject);
        if (!xs) {
          failures.push_back(where + "hull has no variable '" + e.subject + "'");
          break;
        }
        std::string actual = format_values(as.hull, e.subject, *xs);
        std::vector<std::string> have = split_ws(actual);
        if (e.kind == Kind::Hull) {
          std::vector<std::string> want = e.values;
          std::sort(want.begin(), want.end());
          std::sort(have.begin(), have.end());
          if (want != have)
            failures.push_back(where + e.agent + " " + e.subject + " is {" + actual + "} at perception " +
                               std::to_string(e.step));
        } else {
          for (const auto& v : e.values)
            if (std::find(have.begin(), have.end(), v) != have.end())
              failures.push_back(where + e.agent + " still considers " + e.subject + "=" + v + " at perception " +
                                 std::to_string(e.step));
        }
        break;
      }
      case Kind::At: {
        Cell want = *parse_cell(e.values.front());
        if (step->world.pos[i] != want)
          failures.push_back(where + e.agent + " is at " + to_string(step->world.pos[i]) + ", expected " +
                             to_string(want));
        break;
      }
      case Kind::Cells: {
        std::set<Cell> want;
        for (const auto& v : e.values) want.insert(*parse_cell(v));
        auto it = as.cells.find(e.subject);
        std::set<Cell> have = it == as.cells.end() ? std::set<Cell>{} : it->second;
        if (want != have) {
          std::string got;
          for (Cell c : have) got += (got.empty() ? "" : " ") + to_string(c);
          failures.push_back(where + e.agent + " places " + e.subject + " at {" + got + "}");
        }
        break;
      }
    }
  }
  return failures;
}

}  // namespace atlforge
