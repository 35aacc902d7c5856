#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "atlforge/agentspeak.hpp"
#include "atlforge/cgm.hpp"
#include "atlforge/model.hpp"

namespace atlforge {

struct GoalSpec {
  std::string name;
  Formula formula;
  std::optional<std::string> successor;
};

enum class Provenance { Uniform, NonUniform, Prev, Unachievable };

std::string to_string(Provenance p);

struct PlanRecord {
  Plan plan;
  BeliefState belief;
  Provenance provenance = Provenance::Unachievable;
  /// For Prev: the concrete values of the uncertain variables whose cached body was reused.
  std::map<VarId, int> refinement;
};

struct PlanConfig {
  AgentId agent = 0;
  bool ignore_uniform = false;
  /// Environment variables excluded from enumeration.
  std::map<VarId, int> fixed;
  /// Initial values of every agent-local variable.
  std::map<VarId, int> initials;
  /// Linearization bound; 0 means the number of model states.
  std::size_t horizon = 0;
};

/// Every belief over `free`: each variable is either known (one value) or
/// uncertain (a value set of size two or more). Beliefs come out tier by
/// tier, most known variables first. Within a tier the known subsets follow
/// combination order and values vary odometer style with the last variable
/// fastest; uncertain value sets are ordered by their bitmask.
std::vector<BeliefState> enumerate_beliefs(const ModelSpec& spec, std::span<const VarId> free,
                                           const std::map<VarId, int>& fixed = {});

/// Convenience form over bare domains, used for counting.
std::size_t count_beliefs(std::span<const Domain> domains);

/// Bodies computed so far, keyed by goal and canonical belief key. A stored
/// nullopt marks the belief as unachievable.
class StrategyCache {
 public:
  void put(const std::string& goal, const BeliefState& belief, std::optional<std::vector<ActionId>> body);
  /// nullptr when the belief has not been processed.
  const std::optional<std::vector<ActionId>>* find(const std::string& goal, const BeliefState& belief) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::optional<std::vector<ActionId>>> entries_;
};

/// The fallback for beliefs without a strategy: tries every concrete
/// assignment of the uncertain variables (declared variable order, ascending
/// values, first variable slowest) and returns the first cached body together
/// with the refinement it came from. Throws Error when a refinement was never
/// processed.
std::optional<std::pair<std::vector<ActionId>, std::map<VarId, int>>> prev(const std::string& goal,
                                                                            const BeliefState& belief,
                                                                            const StrategyCache& cache);

struct GoalReport {
  std::string goal;
  std::size_t iterations = 0;
  std::size_t plans = 0;
  std::size_t uniform = 0;
  std::size_t non_uniform = 0;
  std::size_t prev = 0;
  std::vector<BeliefState> unachievable;
  /// Beliefs where the objective already holds, so there is nothing to do.
  std::vector<BeliefState> satisfied;
  double seconds = 0;
};

struct Generation {
  std::vector<PlanRecord> records;  // plans with a body, in processing order
  std::vector<GoalReport> reports;
};

/// Observes the cache before each tier of each goal starts (known-variable count given).
using TierHook = std::function<void(const GoalSpec&, std::size_t known_count, const StrategyCache&)>;

/// For every goal and every belief of the configured agent: a uniform strategy
/// (unless ignored), otherwise a strategy valid from every state of the belief,
/// otherwise the cached body of a refinement. Errors carry the goal and belief.
Generation generate_plans(const ModelSpec& spec, std::span<const GoalSpec> goals, const PlanConfig& config,
                          const TierHook& hook = {});

/// Report text: one guard line per unachievable belief, then one summary line per goal.
void write_report(const ModelSpec& spec, const Generation& gen, std::ostream& os);

std::vector<Plan> plans_of(std::span<const PlanRecord> records);

}  // namespace atlforge
