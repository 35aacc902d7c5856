#include <doctest.h>

#include <sstream>

#include "atlforge/error.hpp"
#include "atlforge/planforge.hpp"
#include "atlforge/runtime.hpp"
#include "fixtures.hpp"

using namespace atlforge;

namespace {

GridWorld world() { return GridWorld(GridMap::goldseeker(), {"BA", "RA"}); }

WorldState at(Cell ba, Cell ra) { return {{ba, ra}, {false, false}, false}; }

std::set<Cell> cells_of(const AgentBelief& b, std::size_t agent) {
  std::set<Cell> out;
  for (const auto& w : b) out.insert(w.pos[agent]);
  return out;
}

PlanLibrary library_for(const std::string& agent) {
  auto spec = fixture::goldseeker_spec();
  PlanConfig cfg;
  cfg.agent = spec.find_agent(agent).value();
  cfg.ignore_uniform = true;
  cfg.fixed[fixture::var(spec, "treasureMined")] = 0;
  cfg.initials = fixture::zero_locals(spec);
  std::vector<GoalSpec> goals{{"gettreasure", spec.formulas[0], {}}};
  return PlanLibrary(plans_of(generate_plans(spec, goals, cfg).records));
}

}  // namespace

TEST_CASE("line of sight") {
  auto map = GridMap::goldseeker();
  CHECK(map.walkable_cells().size() == 10);
  CHECK(line_of_sight(map, {1, 0}) == std::vector<Cell>{{0, 0}, {1, 0}, {1, 1}, {2, 0}, {3, 0}});
  CHECK(line_of_sight(map, {0, 1}) == std::vector<Cell>{{0, 0}, {0, 1}, {0, 2}, {1, 1}});
  CHECK(line_of_sight(map, {3, 1}) == std::vector<Cell>{{2, 1}, {3, 0}, {3, 1}, {3, 2}});
  CHECK(line_of_sight(GridMap{1, 1, {}, {0, 0}}, {0, 0}) == std::vector<Cell>{{0, 0}});
  CHECK(line_of_sight(map, {0, 2}) == std::vector<Cell>{{0, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 2}});
}

TEST_CASE("movement and mining") {
  auto w = world();
  auto s = at({1, 0}, {0, 1});
  CHECK(w.step(s, {"right", "right"}).pos == std::vector<Cell>{{1, 0}, {0, 2}});
  CHECK(w.step(s, {"up", std::nullopt}).pos == std::vector<Cell>{{0, 0}, {0, 1}});
  CHECK(w.step(s, {"left", "up"}) == s);

  auto both = at({3, 2}, {3, 2});
  auto one = w.step(both, {"mine", std::nullopt});
  CHECK(one.mined == std::vector<bool>{true, false});
  CHECK_FALSE(one.treasure_mined);
  CHECK(w.step(one, {"mine", "down"}) == one);  // mining twice does nothing
  CHECK(w.step(both, {"mine", "mine"}).treasure_mined);
}

TEST_CASE("percepts") {
  auto w = world();
  auto p = w.perceive(at({1, 0}, {0, 1}), 0);
  CHECK(p.str() == "N=open S=open E=obstacle W=edge");
  auto q = w.perceive(at({0, 2}, {0, 0}), 0);
  CHECK(q.str() == "N=edge S=open E=edge W=open RA@0,-2 treasure@3,0");
}

TEST_CASE("belief progression") {
  auto w = world();
  auto truth = at({1, 0}, {0, 1});
  auto ba = w.initial_belief(0, w.perceive(truth, 0));
  CHECK(ba.size() == 12);
  CHECK(cells_of(ba, 0) == std::set<Cell>{{1, 0}, {2, 0}});
  CHECK(ba.contains(truth));

  auto ra = w.initial_belief(1, w.perceive(truth, 1));
  CHECK(ra.size() == 7);
  CHECK(cells_of(ra, 1) == std::set<Cell>{{0, 1}});

  auto next = w.step(truth, {"down", "right"});
  auto ba2 = w.update_belief(ba, 0, "down", w.perceive(next, 0));
  CHECK(cells_of(ba2, 0) == std::set<Cell>{{2, 0}});
  CHECK(ba2.contains(next));

  auto hull = w.project_hull(ba2);
  REQUIRE(hull.vars.size() == 5);
  CHECK(hull.vars[0].first == "treasureMined");
  CHECK(*hull.find("rowBA") == std::vector<int>{2});
  CHECK(*hull.find("columnRA") == std::vector<int>{1, 2});

  // a percept inconsistent with every candidate world
  auto wrong = w.perceive(at({3, 2}, {0, 0}), 0);
  CHECK_THROWS_AS(w.update_belief(ba, 0, "down", wrong), RuntimeFailure);
}

TEST_CASE("grid dynamics agree with the model") {
  auto spec = fixture::goldseeker_spec();
  auto cgm = build_cgm(spec, fixture::zero_locals(spec));
  CHECK_FALSE(world().disagreement_with(cgm));
}

TEST_CASE("plan selection") {
  std::vector<GuardAtom> guard{{GuardAtom::Kind::Known, "rowba", "1"}};
  Plan p{"g", guard, {"up"}, {}};
  PlanLibrary lib({p});
  CHECK(lib.select("g", guard).body == p.body);
  CHECK(lib.first_goal() == std::optional<std::string>("g"));
  CHECK_THROWS_WITH_AS(lib.select("h", guard), doctest::Contains("no plan"), RuntimeFailure);
  std::vector<GuardAtom> other{{GuardAtom::Kind::Known, "rowba", "2"}};
  CHECK_THROWS_AS(lib.select("g", other), RuntimeFailure);

  PlanLibrary twice({p, p});
  CHECK_THROWS_WITH_AS(twice.select("g", guard), doctest::Contains("2 plans for goal"), RuntimeFailure);
  CHECK_FALSE(PlanLibrary().first_goal());
}

TEST_CASE("replay of the documented scripts") {
  auto script = parse_replay_script(oracle::read_file(oracle::source_path("models/goldseeker.trace")));
  CHECK(script.actions.at("RA").size() == 4);
  CHECK(script.actions.at("BA").size() == 3);
  CHECK(script.expectations.size() > 20);
  auto trace = run_episode(world(), {{"BA", {1, 0}, {}, ""}, {"RA", {0, 1}, {}, ""}}, Mode::Replay, &script, 100);
  CHECK_FALSE(trace.failure);
  CHECK(trace.steps.size() == 5);
  CHECK(check_expectations(trace, script).empty());
  CHECK(trace.steps[1].agents[0].cells.at("BA") == std::set<Cell>{{2, 0}});
  CHECK(trace.steps[4].world.pos[1] == Cell{2, 2});

  // a wrong expectation is reported
  auto broken = parse_replay_script("[BA]\ndown\n[expect]\n1 BA at 0,0\n");
  auto t2 = run_episode(world(), {{"BA", {1, 0}, {}, ""}, {"RA", {0, 1}, {}, ""}}, Mode::Replay, &broken, 100);
  auto failures = check_expectations(t2, broken);
  REQUIRE(failures.size() == 1);
  CHECK(failures[0].find("line 4") != std::string::npos);
}

TEST_CASE("replay script syntax") {
  CHECK_THROWS_AS(parse_replay_script("down\n"), ParseError);
  CHECK_THROWS_AS(parse_replay_script("[BA]\ndown left\n"), ParseError);
  CHECK_THROWS_AS(parse_replay_script("[expect]\nx BA at 1,1\n"), ParseError);
  CHECK_THROWS_AS(parse_replay_script("[expect]\n1 BA hover rowBA 1\n"), ParseError);
}

TEST_CASE("closed loop from every start pair") {
  auto ba = library_for("BA");
  auto ra = library_for("RA");
  auto w = world();
  const auto cells = w.map().walkable_cells();
  std::size_t ok = 0, total = 0;
  for (Cell a : cells) {
    for (Cell b : cells) {
      if (a == b) continue;
      ++total;
      auto trace = run_episode(w, {{"BA", a, ba, ""}, {"RA", b, ra, ""}}, Mode::Closed, nullptr, 100);
      INFO(to_string(a), to_string(b), trace.failure.value_or(""));
      CHECK_FALSE(trace.failure);
      if (trace.treasure_mined) ++ok;
      // plans are reselected only when the hull changes
      for (std::size_t k = 1; k < trace.steps.size(); ++k)
        for (std::size_t i = 0; i < 2; ++i)
          if (trace.steps[k].agents[i].reselected)
            CHECK_FALSE(trace.steps[k].agents[i].hull == trace.steps[k - 1].agents[i].hull);
    }
  }
  CHECK(total == 90);
  CHECK(ok == total);

  auto fixture_run = run_episode(w, {{"BA", {1, 0}, ba, ""}, {"RA", {0, 1}, ra, ""}}, Mode::Closed, nullptr, 100);
  CHECK(fixture_run.treasure_mined);
  std::ostringstream os;
  write_trace(fixture_run, os);
  CHECK(os.str().rfind("step 1\n  world: BA=(1,0) RA=(0,1) treasureMined=false\n", 0) == 0);
  CHECK(os.str().find("result: treasure mined after") != std::string::npos);
}

TEST_CASE("an empty library fails in closed mode") {
  auto trace = run_episode(world(), {{"BA", {1, 0}, {}, "gettreasure"}, {"RA", {0, 1}, {}, "gettreasure"}},
                           Mode::Closed, nullptr, 100);
  REQUIRE(trace.failure);
  CHECK_FALSE(trace.treasure_mined);
}
