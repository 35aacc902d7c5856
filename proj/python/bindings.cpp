#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "atlforge/agentspeak.hpp"
#include "atlforge/atl.hpp"
#include "atlforge/cgm.hpp"
#include "atlforge/cli.hpp"
#include "atlforge/error.hpp"
#include "atlforge/ispl.hpp"
#include "atlforge/planforge.hpp"
#include "atlforge/runtime.hpp"

namespace py = pybind11;
using namespace atlforge;

namespace {

// Python values for variable assignments: bool, int, or a list of either.
std::vector<int> values_for(const ModelSpec& spec, VarId v, const py::handle& obj) {
  std::vector<int> out;
  auto one = [&](const py::handle& x) {
    int value = py::isinstance<py::bool_>(x) ? (x.cast<bool>() ? 1 : 0) : x.cast<int>();
    if (!spec.variables[v].domain.contains(value))
      throw py::value_error(std::to_string(value) + " is outside the domain of " + spec.qualified_name(v));
    out.push_back(value);
  };
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj) || py::isinstance<py::set>(obj)) {
    for (auto x : obj) one(x);
  } else {
    one(obj);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw py::value_error("no values given for " + spec.qualified_name(v));
  return out;
}

VarId lookup(const ModelSpec& spec, const std::string& name) {
  auto v = spec.resolve_var(name);
  if (!v) throw py::key_error("unknown or ambiguous variable '" + name + "'");
  return *v;
}

std::string text_of(const ModelSpec& spec, VarId v, const py::handle& obj) {
  auto values = values_for(spec, v, obj);
  if (values.size() != 1) throw py::value_error("expected a single value for " + spec.qualified_name(v));
  return spec.format_value(v, values[0]);
}

struct Model {
  ModelSpec spec;

  std::vector<std::string> variables() const {
    std::vector<std::string> out;
    for (VarId v = 0; v < static_cast<VarId>(spec.variables.size()); ++v) out.push_back(spec.qualified_name(v));
    return out;
  }

  std::vector<std::string> agents() const {
    std::vector<std::string> out;
    for (const auto& a : spec.agents) out.push_back(a.name);
    return out;
  }

  std::vector<std::string> formulas() const {
    std::vector<std::string> out;
    for (const auto& f : spec.formulas) out.push_back(print_formula(f));
    return out;
  }

  py::dict check(const std::string& formula_text, const py::dict& init) const {
    Formula f = parse_formula(formula_text, spec);
    std::vector<std::vector<int>> choices(spec.variables.size());
    for (auto [key, value] : init) {
      VarId v = lookup(spec, key.cast<std::string>());
      choices[v] = values_for(spec, v, value);
    }
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
    CheckResult r = atlforge::check(cgm, f, initial);
    py::dict out;
    out["holds"] = r.holds;
    out["initial"] = initial.count();
    out["satisfying"] = r.satisfying.count();
    out["states"] = cgm.num_states();
    std::string witness;
    if (r.strategy && r.strategy->objective != StrategyMap::Objective::None) {
      std::ostringstream os;
      write_witness(cgm, *r.strategy, static_cast<StateId>(initial.find_first()), cgm.num_states(), os);
      witness = os.str();
    }
    out["witness"] = witness;
    return out;
  }

  py::dict generate(const std::string& agent, const std::vector<std::tuple<std::string, std::string, std::string>>& goals,
                    const py::dict& fixed, const py::dict& initials, bool ignore_uniform, std::size_t horizon) const {
    RunConfig cfg;
    cfg.agents = {agent};
    cfg.ignore_uniform = ignore_uniform;
    cfg.horizon = horizon;
    for (auto [key, value] : fixed) {
      VarId v = lookup(spec, key.cast<std::string>());
      cfg.fixed[spec.qualified_name(v)] = text_of(spec, v, value);
    }
    for (auto [key, value] : initials) {
      VarId v = lookup(spec, key.cast<std::string>());
      cfg.initials[spec.qualified_name(v)] = text_of(spec, v, value);
    }
    for (const auto& [name, formula, next] : goals) cfg.goals.push_back({name, formula, next.empty() ? "none" : next});
    if (cfg.goals.empty())
      for (std::size_t i = 0; i < spec.formulas.size(); ++i)
        cfg.goals.push_back({"goal" + std::to_string(i + 1), std::to_string(i + 1), "none"});
    auto runs = resolve_config(spec, cfg);
    Generation gen = generate_plans(spec, runs[0].goals, runs[0].config);
    std::ostringstream report;
    write_report(spec, gen, report);
    py::dict out;
    out["plans"] = gen.records.size();
    out["text"] = emit(plans_of(gen.records));
    out["report"] = report.str();
    py::list per_goal;
    for (const auto& r : gen.reports) {
      py::dict g;
      g["goal"] = r.goal;
      g["beliefs"] = r.iterations;
      g["uniform"] = r.uniform;
      g["non_uniform"] = r.non_uniform;
      g["prev"] = r.prev;
      g["unachievable"] = r.unachievable.size();
      per_goal.append(g);
    }
    out["goals"] = per_goal;
    return out;
  }
};

py::dict plan_to_dict(const Plan& p) {
  py::dict d;
  d["goal"] = p.goal;
  std::vector<std::string> guard;
  for (const auto& a : p.guard) guard.push_back(a.str());
  d["guard"] = guard;
  d["body"] = p.body;
  d["successor"] = p.successor ? py::cast(*p.successor) : py::none();
  return d;
}

py::dict replay(const std::string& script_text, const std::map<std::string, std::pair<int, int>>& starts,
                std::size_t max_steps) {
  GridWorld world(GridMap::goldseeker(), {"BA", "RA"});
  std::vector<AgentSetup> setups{{"BA", {1, 0}, {}, ""}, {"RA", {0, 1}, {}, ""}};
  for (const auto& [name, cell] : starts) {
    auto i = world.find_agent(name);
    if (!i) throw py::key_error("unknown agent '" + name + "'");
    setups[*i].start = {cell.first, cell.second};
  }
  auto script = parse_replay_script(script_text);
  auto trace = run_episode(world, setups, Mode::Replay, &script, max_steps);
  std::ostringstream os;
  write_trace(trace, os);
  py::dict out;
  out["trace"] = os.str();
  out["failures"] = check_expectations(trace, script);
  out["expectations"] = script.expectations.size();
  out["error"] = trace.failure ? py::cast(*trace.failure) : py::none();
  return out;
}

}  // namespace

PYBIND11_MODULE(_atlforge, m) {
  m.doc() = "ATL model checking and AgentSpeak plan generation";

  // Translators run newest first, so the more specific ParseError goes last.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<Model>(m, "Model")
      .def(py::init([](const std::string& text) { return Model{parse_model(text)}; }), py::arg("text"))
      .def_property_readonly("variables", &Model::variables)
      .def_property_readonly("agents", &Model::agents)
      .def_property_readonly("formulas", &Model::formulas)
      .def("__str__", [](const Model& self) { return print_model(self.spec); })
      .def("check", &Model::check, py::arg("formula"), py::arg("init") = py::dict())
      .def("generate_plans", &Model::generate, py::arg("agent"),
           py::arg("goals") = std::vector<std::tuple<std::string, std::string, std::string>>{},
           py::arg("fixed") = py::dict(), py::arg("initials") = py::dict(), py::arg("ignore_uniform") = false,
           py::arg("horizon") = 0);

  m.def(
      "count_beliefs",
      [](const std::vector<int>& sizes) {
        std::vector<Domain> domains;
        for (int l : sizes) {
          if (l < 1) throw py::value_error("domain sizes must be positive");
          domains.push_back({false, 0, l - 1});
        }
        return count_beliefs(domains);
      },
      py::arg("sizes"));

  m.def(
      "load_plans",
      [](const std::string& text) {
        py::list out;
        for (const auto& p : load(text)) out.append(plan_to_dict(p));
        return out;
      },
      py::arg("text"));

  m.def("roundtrip_plans", [](const std::string& text) { return emit(load(text)); }, py::arg("text"));

  m.def("replay", &replay, py::arg("script"), py::arg("starts") = std::map<std::string, std::pair<int, int>>{},
        py::arg("max_steps") = 100);
}
