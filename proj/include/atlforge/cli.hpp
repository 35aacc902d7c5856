#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/error.hpp"
#include "atlforge/model.hpp"
#include "atlforge/planforge.hpp"

namespace atlforge {

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitFailure = 2, kExitSimulation = 3 };

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GoalEntry {
  std::string name;
  std::string formula;  // 1-based index into the model's Formulae, or formula text
  std::string next;     // successor goal name, or "none"
  bool operator==(const GoalEntry&) const = default;
};

/// Answers to the generation prompts, as text keyed by qualified variable names.
struct RunConfig {
  std::vector<std::string> agents;  // one generation run per agent
  bool ignore_uniform = false;
  std::map<std::string, std::string> fixed;     // Owner.var -> value
  std::map<std::string, std::string> initials;  // Agent.var -> value
  std::vector<GoalEntry> goals;
  std::size_t horizon = 0;
  std::size_t max_steps = 100;
  bool operator==(const RunConfig&) const = default;
};

/// `key = value` lines with `#` comments. Keys: agent, ignore_uniform,
/// fix.<Owner>.<var>, init.<Agent>.<var>, goal.<i>.name, goal.<i>.formula,
/// goal.<i>.next, horizon, max_steps. Throws ConfigError.
RunConfig parse_config(std::string_view text);

/// Asks for the same answers on `in`, prompting on `out`: initial values of
/// agent variables, statically fixed environment variables, goal names and
/// successors (one goal per model formula), the uncertain agent and whether
/// to ignore uniform strategies.
RunConfig interactive_config(const ModelSpec& spec, std::istream& in, std::ostream& out);

struct ResolvedRun {
  std::string agent;
  PlanConfig config;
  std::vector<GoalSpec> goals;
};

/// Validates the answers against the model. Throws ConfigError.
std::vector<ResolvedRun> resolve_config(const ModelSpec& spec, const RunConfig& config);

int cmd_parse(const std::string& model_path, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& model_path, const std::string& formula, const std::vector<std::string>& init,
              std::ostream& out, std::ostream& err);
int cmd_genplans(const std::string& model_path, const RunConfig& config, const std::string& out_dir,
                 std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::string mode = "closed";
  std::optional<std::string> model_path;
  std::vector<std::string> plans;   // Agent=path, or a path named after the agent
  std::vector<std::string> starts;  // Agent=row,col
  std::optional<std::string> script_path;
  std::optional<std::string> trace_path;
  std::size_t max_steps = 100;
  bool all_starts = false;
};
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

/// Entry point used by the executable.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace atlforge
