#include "atlforge/planforge.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>

#include "atlforge/atl.hpp"
#include "atlforge/error.hpp"

namespace atlforge {
namespace {

// Value sets with at least two members, ordered by bitmask.
std::vector<std::vector<int>> uncertain_sets(const Domain& d) {
  std::vector<std::vector<int>> out;
  const int l = d.size();
  for (unsigned mask = 1; mask < (1u << l); ++mask) {
    if (std::popcount(mask) < 2) continue;
    std::vector<int> set;
    for (int i = 0; i < l; ++i)
      if (mask & (1u << i)) set.push_back(d.lo + i);
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Uniform: return "uniform";
    case Provenance::NonUniform: return "non-uniform";
    case Provenance::Prev: return "prev";
    case Provenance::Unachievable: return "unachievable";
  }
  return "?";
}

std::vector<BeliefState> enumerate_beliefs(const ModelSpec& spec, std::span<const VarId> free,
                                           const std::map<VarId, int>& fixed) {
  const std::size_t n = free.size();
  for (VarId v : free) {
    if (spec.variables.at(v).domain.size() > 16) throw Error("domain of " + spec.qualified_name(v) + " is too large to enumerate beliefs");
  }
  std::vector<BeliefState> out;
  for (std::size_t k = n + 1; k-- > 0;) {
    std::vector<bool> known(n, false);
    std::fill(known.begin(), known.begin() + k, true);
    do {
      // Each variable contributes a list of options; an option is a value set.
      std::vector<std::vector<std::vector<int>>> options(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Domain& d = spec.variables[free[i]].domain;
        if (known[i]) {
          for (int x = d.lo; x <= d.hi; ++x) options[i].push_back({x});
        } else {
          options[i] = uncertain_sets(d);
        }
      }
      if (std::any_of(options.begin(), options.end(), [](const auto& o) { return o.empty(); })) continue;
      std::vector<std::size_t> cursor(n, 0);
      while (true) {
        BeliefState b;
        b.fixed = fixed;
        for (std::size_t i = 0; i < n; ++i) {
          const auto& set = options[i][cursor[i]];
          if (known[i]) {
            b.known.emplace(free[i], set.front());
          } else {
            b.possible.emplace(free[i], set);
          }
        }
        out.push_back(std::move(b));
        std::size_t i = n;
        while (i > 0 && ++cursor[i - 1] == options[i - 1].size()) cursor[--i] = 0;
        if (i == 0) break;
      }
    } while (std::prev_permutation(known.begin(), known.end()));
  }
  return out;
}

std::size_t count_beliefs(std::span<const Domain> domains) {
  std::size_t total = 1;
  for (const auto& d : domains) total *= (std::size_t{1} << d.size()) - 1;
  return total;
}

void StrategyCache::put(const std::string& goal, const BeliefState& belief,
                        std::optional<std::vector<ActionId>> body) {
  entries_[goal + "|" + belief.key()] = std::move(body);
}

const std::optional<std::vector<ActionId>>* StrategyCache::find(const std::string& goal,
                                                                const BeliefState& belief) const {
  auto it = entries_.find(goal + "|" + belief.key());
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::pair<std::vector<ActionId>, std::map<VarId, int>>> prev(const std::string& goal,
                                                                            const BeliefState& belief,
                                                                            const StrategyCache& cache) {
  if (belief.possible.empty()) return std::nullopt;
  std::vector<std::pair<VarId, const std::vector<int>*>> unknown;
  for (const auto& [v, xs] : belief.possible) unknown.emplace_back(v, &xs);
  std::vector<std::size_t> cursor(unknown.size(), 0);
  while (true) {
    BeliefState refined;
    refined.fixed = belief.fixed;
    refined.known = belief.known;
    std::map<VarId, int> assignment;
    for (std::size_t i = 0; i < unknown.size(); ++i) {
      int x = (*unknown[i].second)[cursor[i]];
      refined.known[unknown[i].first] = x;
      assignment[unknown[i].first] = x;
    }
    const auto* hit = cache.find(goal, refined);
    if (!hit) throw Error("refinement " + refined.key() + " of goal '" + goal + "' has not been processed yet");
    if (*hit && !(*hit)->empty()) return std::make_pair(**hit, assignment);
    std::size_t i = unknown.size();
    while (i > 0 && ++cursor[i - 1] == unknown[i - 1].second->size()) cursor[--i] = 0;
    if (i == 0) break;
  }
  return std::nullopt;
}

Generation generate_plans(const ModelSpec& spec, std::span<const GoalSpec> goals, const PlanConfig& config,
                          const TierHook& hook) {
  if (config.agent < 0 || config.agent >= static_cast<AgentId>(spec.agents.size()))
    throw Error("uncertain agent index out of range");
  for (const auto& [v, x] : config.fixed) {
    if (spec.variables.at(v).owner != kEnvironment)
      throw Error(spec.qualified_name(v) + " is not an environment variable and cannot be fixed");
    if (!spec.variables[v].domain.contains(x)) throw Error("fixed value out of domain for " + spec.qualified_name(v));
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (goals[i].name == goals[j].name) throw Error("duplicate goal name '" + goals[i].name + "'");
  }
  for (const auto& g : goals) {
    if (g.successor && std::none_of(goals.begin(), goals.end(), [&](const GoalSpec& o) { return o.name == *g.successor; }))
      throw Error("goal '" + g.name + "' names an undeclared successor '" + *g.successor + "'");
  }

  const Cgm cgm = build_cgm(spec, config.initials);
  const AgentId agent = config.agent;
  const std::size_t horizon = config.horizon ? config.horizon : cgm.num_states();

  std::vector<VarId> free;
  for (VarId v : spec.environment_vars())
    if (!config.fixed.contains(v)) free.push_back(v);
  const std::vector<BeliefState> beliefs = enumerate_beliefs(spec, free, config.fixed);

  Generation gen;
  StrategyCache cache;
  for (const GoalSpec& goal : goals) {
    const auto started = std::chrono::steady_clock::now();
    GoalReport report;
    report.goal = goal.name;

    // The labeling does not depend on the belief: solve once with an empty
    // initial set, which always yields the strategy over the whole winning region.
    const CheckResult solved = check(cgm, goal.formula, cgm.empty_set());
    std::optional<UniformSearch> uniform;
    if (!config.ignore_uniform) uniform.emplace(cgm, goal.formula, agent);

    std::optional<std::size_t> tier;
    for (const BeliefState& belief : beliefs) {
      if (tier != belief.known.size()) {
        tier = belief.known.size();
        if (hook) hook(goal, *tier, cache);
      }
      ++report.iterations;
      try {
        const StateSet states = belief_states(cgm, belief);
        std::optional<std::vector<ActionId>> body;
        Provenance provenance = Provenance::Unachievable;
        std::map<VarId, int> refinement;
        if (uniform && states.any()) {
          if (auto st = uniform->solve(states)) {
            body = linearize(cgm, *st, states, agent, horizon);
            provenance = Provenance::Uniform;
          }
        }
        if (!body && states.any() && states.is_subset_of(solved.satisfying)) {
          body = linearize(cgm, *solved.strategy, states, agent, horizon);
          provenance = Provenance::NonUniform;
        }
        if (!body) {
          if (auto hit = prev(goal.name, belief, cache)) {
            body = std::move(hit->first);
            refinement = std::move(hit->second);
            provenance = Provenance::Prev;
          }
        }
        cache.put(goal.name, belief, body);
        if (!body) {
          report.unachievable.push_back(belief);
          continue;
        }
        if (body->empty()) {
          report.satisfied.push_back(belief);
          continue;
        }
        PlanRecord rec;
        rec.plan.goal = goal.name;
        rec.plan.guard = make_guard(spec, belief);
        for (ActionId a : *body) rec.plan.body.push_back(cgm.actions(agent)[a]);
        rec.plan.successor = goal.successor;
        rec.belief = belief;
        rec.provenance = provenance;
        rec.refinement = std::move(refinement);
        switch (provenance) {
          case Provenance::Uniform: ++report.uniform; break;
          case Provenance::NonUniform: ++report.non_uniform; break;
          case Provenance::Prev: ++report.prev; break;
          case Provenance::Unachievable: break;
        }
        ++report.plans;
        gen.records.push_back(std::move(rec));
      } catch (const Error& e) {
        throw Error("goal '" + goal.name + "', belief " + format_guard(make_guard(spec, belief)) + ": " + e.what());
      }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    gen.reports.push_back(std::move(report));
  }
  return gen;
}

void write_report(const ModelSpec& spec, const Generation& gen, std::ostream& os) {
  for (const auto& r : gen.reports) {
    for (const auto& b : r.unachievable) os << "unachievable " << r.goal << ": " << format_guard(make_guard(spec, b)) << '\n';
    for (const auto& b : r.satisfied) os << "satisfied " << r.goal << ": " << format_guard(make_guard(spec, b)) << '\n';
  }
  for (const auto& r : gen.reports) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
    os << "goal " << r.goal << ": " << r.plans << " plans, " << r.unachievable.size() << " unachievable, " << secs
       << "s\n";
  }
}

std::vector<Plan> plans_of(std::span<const PlanRecord> records) {
  std::vector<Plan> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.plan);
  return out;
}

}  // namespace atlforge
