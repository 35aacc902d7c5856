#include "atlforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "atlforge/agentspeak.hpp"
#include "atlforge/atl.hpp"
#include "atlforge/cgm.hpp"
#include "atlforge/ispl.hpp"
#include "atlforge/runtime.hpp"

namespace atlforge {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_bool(const std::string& text, const std::string& what) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "y" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "n" || t == "0" || t == "off") return false;
  throw ConfigError("expected a yes/no answer for " + what + " but found '" + text + "'");
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used == text.size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(what + " must be a positive integer, found '" + text + "'");
}

ModelSpec load_model(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.col(), e.message());
  }
}

std::string plural(std::size_t n, const std::string& word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

VarId resolve_qualified(const ModelSpec& spec, const std::string& name, const std::string& what) {
  auto v = spec.resolve_var(name);
  if (!v) throw ConfigError(what + " refers to an undeclared variable '" + name + "'");
  return *v;
}

int value_of(const ModelSpec& spec, VarId v, const std::string& text) {
  auto x = spec.parse_value(v, text);
  if (!x) throw ConfigError("value '" + text + "' is outside the domain of " + spec.qualified_name(v));
  return *x;
}

std::optional<Cell> parse_cell_text(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 2) return std::nullopt;
  try {
    std::size_t a = 0, b = 0;
    Cell c{std::stoi(parts[0], &a), std::stoi(parts[1], &b)};
    if (a != parts[0].size() || b != parts[1].size()) return std::nullopt;
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::size_t, GoalEntry> goals;
  std::map<std::size_t, bool> has_formula, has_next;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (key == "agent") {
      for (const auto& a : split(value, ','))
        if (!a.empty()) cfg.agents.push_back(a);
    } else if (key == "ignore_uniform") {
      cfg.ignore_uniform = parse_bool(value, key);
    } else if (key == "horizon") {
      cfg.horizon = parse_count(value, key);
    } else if (key == "max_steps") {
      cfg.max_steps = parse_count(value, key);
    } else if (key.rfind("fix.", 0) == 0) {
      cfg.fixed[key.substr(4)] = value;
    } else if (key.rfind("init.", 0) == 0) {
      cfg.initials[key.substr(5)] = value;
    } else if (key.rfind("goal.", 0) == 0) {
      auto parts = split(key, '.');
      if (parts.size() != 3) throw ConfigError(where + ": goal keys look like goal.<i>.name");
      std::size_t i = parse_count(parts[1], where + ": goal number");
      GoalEntry& g = goals[i];
      if (parts[2] == "name") {
        g.name = value;
      } else if (parts[2] == "formula") {
        g.formula = value;
        has_formula[i] = true;
      } else if (parts[2] == "next") {
        g.next = value;
        has_next[i] = true;
      } else {
        throw ConfigError(where + ": unknown goal field '" + parts[2] + "'");
      }
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  for (auto& [i, g] : goals) {
    if (g.name.empty()) throw ConfigError("goal " + std::to_string(i) + " has no name");
    if (!has_formula[i]) g.formula = std::to_string(i);
    if (!has_next[i]) g.next = "none";
    cfg.goals.push_back(g);
  }
  return cfg;
}

RunConfig interactive_config(const ModelSpec& spec, std::istream& in, std::ostream& out) {
  RunConfig cfg;
  auto ask = [&](const std::string& prompt) {
    out << prompt << std::flush;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("input ended before every question was answered");
    return trim(line);
  };
  for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v) {
    if (spec.variables[v].owner == kEnvironment) continue;
    std::string answer;
    while (answer.empty()) answer = ask("Initial value of agent variable " + spec.qualified_name(v) + ": ");
    cfg.initials[spec.qualified_name(v)] = answer;
  }
  for (VarId v : spec.environment_vars()) {
    std::string answer = ask("Fix environment variable " + spec.variables[v].name + " to a value (blank to leave it free): ");
    if (!answer.empty()) cfg.fixed[spec.qualified_name(v)] = answer;
  }
  for (std::size_t i = 0; i < spec.formulas.size(); ++i) {
    GoalEntry g;
    g.formula = std::to_string(i + 1);
    while (g.name.empty()) g.name = ask("Goal name for formula " + g.formula + " " + print_formula(spec.formulas[i]) + ": ");
    std::string next = ask("Goal to adopt after achieving " + g.name + " (blank for none): ");
    g.next = next.empty() ? "none" : next;
    cfg.goals.push_back(g);
  }
  std::string agent;
  while (agent.empty()) agent = ask("Agent whose uncertainty is modelled: ");
  cfg.agents = {agent};
  std::string ignore = ask("Ignore uniform strategies? [y/n]: ");
  cfg.ignore_uniform = !ignore.empty() && parse_bool(ignore, "ignoring uniform strategies");
  return cfg;
}

std::vector<ResolvedRun> resolve_config(const ModelSpec& spec, const RunConfig& config) {
  if (config.agents.empty()) throw ConfigError("config names no uncertain agent");
  if (config.goals.empty()) throw ConfigError("config declares no goals");

  PlanConfig base;
  base.ignore_uniform = config.ignore_uniform;
  base.horizon = config.horizon;
  for (const auto& [name, text] : config.fixed) {
    VarId v = resolve_qualified(spec, name, "fix." + name);
    if (spec.variables[v].owner == kEnvironment) {
      base.fixed[v] = value_of(spec, v, text);
    } else {
      base.initials[v] = value_of(spec, v, text);
    }
  }
  for (const auto& [name, text] : config.initials) {
    VarId v = resolve_qualified(spec, name, "init." + name);
    if (spec.variables[v].owner == kEnvironment)
      throw ConfigError("init." + name + " names an environment variable; use fix." + name);
    base.initials[v] = value_of(spec, v, text);
  }
  std::vector<std::string> missing;
  for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v)
    if (spec.variables[v].owner != kEnvironment && !base.initials.contains(v)) missing.push_back(spec.qualified_name(v));
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("no initial value for agent variable(s) " + list);
  }

  std::vector<GoalSpec> goals;
  for (const auto& g : config.goals) {
    for (const auto& other : goals)
      if (other.name == g.name) throw ConfigError("duplicate goal name '" + g.name + "'");
    GoalSpec spec_goal;
    spec_goal.name = g.name;
    bool is_index = !g.formula.empty() && std::all_of(g.formula.begin(), g.formula.end(), ::isdigit);
    if (is_index) {
      std::size_t i = std::stoul(g.formula);
      if (i == 0 || i > spec.formulas.size())
        throw ConfigError("goal '" + g.name + "' refers to formula " + g.formula + " but the model has " +
                          plural(spec.formulas.size(), "formula"));
      spec_goal.formula = spec.formulas[i - 1];
    } else {
      try {
        spec_goal.formula = parse_formula(g.formula, spec);
      } catch (const ParseError& e) {
        throw ConfigError("formula of goal '" + g.name + "': " + e.message());
      }
    }
    if (g.next != "none" && !g.next.empty()) spec_goal.successor = g.next;
    goals.push_back(std::move(spec_goal));
  }
  for (const auto& g : goals) {
    if (g.successor && std::none_of(goals.begin(), goals.end(), [&](const GoalSpec& o) { return o.name == *g.successor; }))
      throw ConfigError("goal '" + g.name + "' is followed by undeclared goal '" + *g.successor + "'");
  }

  std::vector<ResolvedRun> runs;
  for (const auto& name : config.agents) {
    auto a = spec.find_agent(name);
    if (!a) throw ConfigError("config names an undeclared agent '" + name + "'");
    ResolvedRun run{name, base, goals};
    run.config.agent = *a;
    runs.push_back(std::move(run));
  }
  return runs;
}

int cmd_parse(const std::string& model_path, std::ostream& out, std::ostream& err) {
  try {
    ModelSpec spec = load_model(model_path);
    std::size_t agent_vars = spec.variables.size() - spec.environment_vars().size();
    out << plural(spec.environment_vars().size(), "environment var") << ", " << plural(spec.agents.size(), "agent")
        << ", " << plural(spec.groups.size(), "group") << ", " << plural(spec.propositions.size(), "proposition")
        << ", " << plural(spec.formulas.size(), "formula") << '\n';
    out << plural(agent_vars, "agent var") << ":";
    for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v)
      if (spec.variables[v].owner != kEnvironment) out << ' ' << spec.qualified_name(v);
    out << '\n';
    for (std::size_t i = 0; i < spec.formulas.size(); ++i) out << "formula " << i + 1 << ": " << print_formula(spec.formulas[i]) << '\n';
    return kExitOk;
  } catch (const ParseError& e) {
    err << model_path << ':' << e.line() << ':' << e.col() << ": " << e.message() << '\n';
  } catch (const Error& e) {
    err << model_path << ": " << e.what() << '\n';
  }
  return kExitValidation;
}

int cmd_check(const std::string& model_path, const std::string& formula_text, const std::vector<std::string>& init,
              std::ostream& out, std::ostream& err) {
  ModelSpec spec;
  Formula formula;
  std::vector<std::vector<int>> choices;
  try {
    spec = load_model(model_path);
    formula = parse_formula(formula_text, spec);
    choices.resize(spec.variables.size());
    for (const auto& entry : init) {
      auto eq = entry.find('=');
      if (eq == std::string::npos) throw ConfigError("--init entries look like var=value or var=v1|v2");
      VarId v = resolve_qualified(spec, trim(entry.substr(0, eq)), "--init");
      if (!choices[v].empty()) throw ConfigError("--init assigns " + spec.qualified_name(v) + " twice");
      for (const auto& x : split(entry.substr(eq + 1), '|')) choices[v].push_back(value_of(spec, v, x));
      std::sort(choices[v].begin(), choices[v].end());
      choices[v].erase(std::unique(choices[v].begin(), choices[v].end()), choices[v].end());
    }
  } catch (const ParseError& e) {
    err << "formula:" << e.line() << ':' << e.col() << ": " << e.message() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  try {
    std::map<VarId, int> locals;
    for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v) {
      if (choices[v].empty())
        for (int x = spec.variables[v].domain.lo; x <= spec.variables[v].domain.hi; ++x) choices[v].push_back(x);
      if (spec.variables[v].owner != kEnvironment) locals[v] = choices[v].front();
    }
    Cgm cgm = build_cgm(spec, locals);
    StateSet initial = cgm.empty_set();
    std::vector<std::size_t> cursor(choices.size(), 0);
    std::vector<int> values(choices.size());
    while (true) {
      for (std::size_t v = 0; v < choices.size(); ++v) values[v] = choices[v][cursor[v]];
      initial.set(cgm.encode(values));
      std::size_t i = choices.size();
      while (i > 0 && ++cursor[i - 1] == choices[i - 1].size()) cursor[--i] = 0;
      if (i == 0) break;
    }
    CheckResult r = check(cgm, formula, initial);
    out << (r.holds ? "TRUE" : "FALSE") << '\n';
    out << "formula: " << print_formula(formula) << '\n';
    out << "initial states: " << initial.count() << ", satisfying states: " << r.satisfying.count() << " of "
        << cgm.num_states() << '\n';
    if (!r.holds) {
      for (std::size_t s = initial.find_first(); s != StateSet::npos; s = initial.find_next(s)) {
        if (!r.satisfying.test(s)) {
          out << "fails at s" << s << ": " << cgm.format_state(static_cast<StateId>(s)) << '\n';
          break;
        }
      }
      return kExitFailure;
    }
    if (r.strategy && r.strategy->objective != StrategyMap::Objective::None) {
      const StateId start = static_cast<StateId>(initial.find_first());
      out << "witness from s" << start << ": " << cgm.format_state(start) << '\n';
      write_witness(cgm, *r.strategy, start, cgm.num_states(), out);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_genplans(const std::string& model_path, const RunConfig& config, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
  ModelSpec spec;
  std::vector<ResolvedRun> runs;
  try {
    spec = load_model(model_path);
    runs = resolve_config(spec, config);
    std::filesystem::create_directories(out_dir);
  } catch (const ParseError& e) {
    err << model_path << ':' << e.line() << ':' << e.col() << ": " << e.message() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  for (const auto& run : runs) {
    try {
      Generation gen = generate_plans(spec, run.goals, run.config);
      const auto base = std::filesystem::path(out_dir) / run.agent;
      std::ofstream asl(base.string() + ".asl", std::ios::binary);
      asl << emit(plans_of(gen.records));
      std::ofstream report(base.string() + ".report", std::ios::binary);
      write_report(spec, gen, report);
      if (!asl || !report) throw Error("cannot write plan files under '" + out_dir + "'");
      out << run.agent << ": " << gen.records.size() << " plans written to " << base.string() << ".asl\n";
      for (const auto& r : gen.reports) {
        out << "  goal " << r.goal << ": " << r.iterations << " beliefs, " << r.uniform << " uniform, " << r.non_uniform
            << " non-uniform, " << r.prev << " prev, " << r.unachievable.size() << " unachievable\n";
      }
    } catch (const Error& e) {
      err << run.agent << ": " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  GridWorld world(GridMap::goldseeker(), {"BA", "RA"});
  std::vector<AgentSetup> setups{{"BA", {1, 0}, {}, ""}, {"RA", {0, 1}, {}, ""}};
  Mode mode = Mode::Closed;
  ReplayScript script;
  try {
    if (options.mode == "replay") {
      mode = Mode::Replay;
    } else if (options.mode != "closed") {
      throw ConfigError("--mode must be closed or replay");
    }
    if (options.model_path) {
      ModelSpec spec = load_model(*options.model_path);
      std::map<VarId, int> locals;
      for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v)
        if (spec.variables[v].owner != kEnvironment) locals[v] = spec.variables[v].domain.lo;
      if (auto d = world.disagreement_with(build_cgm(spec, locals)))
        throw ConfigError("the grid world does not follow the model's rules at " + *d);
    }
    for (const auto& s : options.starts) {
      auto eq = s.find('=');
      auto cell = eq == std::string::npos ? std::nullopt : parse_cell_text(s.substr(eq + 1));
      if (!cell) throw ConfigError("--starts entries look like BA=1,0");
      auto i = world.find_agent(s.substr(0, eq));
      if (!i) throw ConfigError("unknown agent in --starts: " + s.substr(0, eq));
      setups[*i].start = *cell;
    }
    for (const auto& p : options.plans) {
      auto eq = p.find('=');
      std::string agent = eq == std::string::npos ? std::filesystem::path(p).stem().string() : p.substr(0, eq);
      std::string path = eq == std::string::npos ? p : p.substr(eq + 1);
      auto i = world.find_agent(agent);
      if (!i) throw ConfigError("cannot tell which agent plan file '" + p + "' belongs to; use Agent=path");
      try {
        setups[*i].library = PlanLibrary(load(read_file(path)));
      } catch (const ParseError& e) {
        throw ConfigError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.col()) + ": " + e.message());
      }
    }
    if (mode == Mode::Replay) {
      if (!options.script_path) throw ConfigError("replay mode needs --script");
      try {
        script = parse_replay_script(read_file(*options.script_path));
      } catch (const ParseError& e) {
        throw ConfigError(*options.script_path + ":" + std::to_string(e.line()) + ": " + e.message());
      }
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }

  std::ofstream trace_file;
  std::ostream* trace_out = &out;
  if (options.trace_path) {
    trace_file.open(*options.trace_path, std::ios::binary);
    if (!trace_file) {
      err << "cannot write '" << *options.trace_path << "'\n";
      return kExitValidation;
    }
    trace_out = &trace_file;
  }
  try {
    Trace trace = run_episode(world, setups, mode, mode == Mode::Replay ? &script : nullptr, options.max_steps);
    write_trace(trace, *trace_out);
    bool ok = !trace.failure;
    if (mode == Mode::Replay) {
      auto failures = check_expectations(trace, script);
      for (const auto& f : failures) err << "expectation failed: " << f << '\n';
      out << "replay: " << script.expectations.size() - failures.size() << "/" << script.expectations.size()
          << " expectations hold\n";
      ok = ok && failures.empty();
    } else {
      ok = ok && trace.treasure_mined;
    }
    if (trace.failure) err << "simulation failed: " << *trace.failure << '\n';
    if (options.all_starts && mode == Mode::Closed) {
      std::size_t pairs = 0, mined = 0;
      for (Cell a : world.map().walkable_cells()) {
        for (Cell b : world.map().walkable_cells()) {
          if (a == b) continue;
          ++pairs;
          auto s = setups;
          s[0].start = a;
          s[1].start = b;
          if (run_episode(world, s, Mode::Closed, nullptr, options.max_steps).treasure_mined) ++mined;
        }
      }
      out << "all starts: " << mined << "/" << pairs << " start pairs mined the treasure\n";
    }
    return ok ? kExitOk : kExitSimulation;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitSimulation;
  }
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plan synthesis from ATL goals over interpreted-systems models"};
  app.require_subcommand(1);

  std::string model, formula, config_path, out_dir = "plans";
  std::vector<std::string> init;
  bool interactive = false;
  std::size_t horizon = 0;
  SimulateOptions sim;
  std::string max_steps_text;

  auto* parse = app.add_subcommand("parse", "Validate a model file and summarize it");
  parse->add_option("--model,model", model, "Model file")->required();

  auto* chk = app.add_subcommand("check", "Model-check one ATL formula");
  chk->add_option("--model", model, "Model file")->required();
  chk->add_option("--formula", formula, "Formula text, e.g. '<g1> F(p)'")->required();
  chk->add_option("--init", init, "Initial assignments var=value or var=v1|v2; others range over their domain");

  auto* gen = app.add_subcommand("genplans", "Generate AgentSpeak plan libraries");
  gen->add_option("--model", model, "Model file")->required();
  gen->add_option("--config", config_path, "Run configuration");
  gen->add_flag("--interactive", interactive, "Answer the configuration questions on stdin");
  gen->add_option("--out", out_dir, "Output directory");
  gen->add_option("--horizon", horizon, "Maximum plan body length");

  auto* simc = app.add_subcommand("simulate", "Run the Goldseeker world with plan libraries");
  simc->add_option("--mode", sim.mode, "closed or replay");
  simc->add_option("--model", sim.model_path, "Model whose rules the world is checked against");
  simc->add_option("--plans", sim.plans, "Plan files as Agent=path");
  simc->add_option("--starts", sim.starts, "Start cells as Agent=row,col");
  simc->add_option("--script", sim.script_path, "Replay script");
  simc->add_option("--trace", sim.trace_path, "Write the trace here instead of stdout");
  simc->add_option("--max-steps", sim.max_steps, "Step limit");
  simc->add_flag("--all-starts", sim.all_starts, "Also try every pair of distinct start cells");

  auto* dump = app.add_subcommand("dump", "List the states and transitions of a model");
  dump->add_option("--model,model", model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  if (parse->parsed()) return cmd_parse(model, out, err);
  if (chk->parsed()) return cmd_check(model, formula, init, out, err);
  if (simc->parsed()) return cmd_simulate(sim, out, err);
  if (dump->parsed()) {
    try {
      ModelSpec spec = load_model(model);
      std::map<VarId, int> locals;
      for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v)
        if (spec.variables[v].owner != kEnvironment) locals[v] = spec.variables[v].domain.lo;
      dump_cgm(build_cgm(spec, locals), out);
      return kExitOk;
    } catch (const Error& e) {
      err << e.what() << '\n';
      return kExitValidation;
    }
  }
  // genplans
  RunConfig cfg;
  try {
    if (interactive) {
      cfg = interactive_config(load_model(model), in, out);
    } else if (!config_path.empty()) {
      cfg = parse_config(read_file(config_path));
    } else {
      throw ConfigError("genplans needs --config or --interactive");
    }
  } catch (const ParseError& e) {
    err << model << ':' << e.line() << ':' << e.col() << ": " << e.message() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  if (horizon) cfg.horizon = horizon;
  return cmd_genplans(model, cfg, out_dir, out, err);
}

}  // namespace atlforge
