#include <doctest.h>

#include <random>
#include <sstream>

#include "atlforge/atl.hpp"
#include "atlforge/error.hpp"
#include "fixtures.hpp"

using namespace atlforge;

namespace {

StateSet single(const Cgm& cgm, StateId s) {
  auto set = cgm.empty_set();
  set.set(s);
  return set;
}

StateSet from_bools(const std::vector<bool>& v) {
  StateSet set(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) set[i] = v[i];
  return set;
}

bool subset(const StateSet& a, const StateSet& b) { return a.is_subset_of(b); }

}  // namespace

TEST_CASE("flip model next and always") {
  auto spec = fixture::flip_spec();
  auto cgm = build_cgm(spec, {});
  const StateId sp = 1;

  auto next = check(cgm, spec.formulas[0], single(cgm, sp));
  REQUIRE(next.holds);
  REQUIRE(next.strategy);
  CHECK(next.strategy->objective == StrategyMap::Objective::Next);
  CHECK(next.strategy->choice.at(sp) == std::vector<ActionId>{1});  // b
  std::ostringstream witness;
  write_witness(cgm, *next.strategy, sp, 2, witness);
  CHECK(witness.str() == "step 0: state s1, joint (b,a) -> s0\n");

  auto always = check(cgm, spec.formulas[1], single(cgm, sp));
  REQUIRE(always.holds);
  CHECK(always.satisfying.count() == 1);
  CHECK(always.strategy->objective == StrategyMap::Objective::Safety);
  CHECK(always.strategy->choice.at(sp) == std::vector<ActionId>{0});  // a

  // G(p) fails from the ¬p state
  auto from_not_p = check(cgm, spec.formulas[1], single(cgm, 0));
  CHECK_FALSE(from_not_p.holds);
  CHECK_FALSE(from_not_p.strategy);

  auto uniform = find_uniform_strategy(cgm, spec.formulas[1], single(cgm, sp), 0);
  REQUIRE(uniform);
  // Ag1 has no local state, so both states form one class and share the action
  CHECK(uniform->uniform_action.at(sp) == 0);
  CHECK(uniform->uniform_action.at(0) == 0);
}

TEST_CASE("an objective already met needs no moves") {
  auto spec = fixture::flip_spec();
  auto cgm = build_cgm(spec, {});
  auto f = check(cgm, spec.formulas[2], single(cgm, 0));  // F(!p) at ¬p
  REQUIRE(f.holds);
  CHECK(f.strategy->rank.at(0) == 0);
  CHECK(linearize(cgm, *f.strategy, single(cgm, 0), 0, 4).empty());
  // from p: one b
  auto g = check(cgm, spec.formulas[2], single(cgm, 1));
  CHECK(linearize(cgm, *g.strategy, single(cgm, 1), 0, 4) == std::vector<ActionId>{1});
}

TEST_CASE("pre on random models matches the oracle") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto cgm = oracle::random_model(rng, 2 + rng() % 5, 3);
    std::vector<AgentId> coalition;
    if (rng() % 2) coalition.push_back(0);
    if (rng() % 2) coalition.push_back(1);
    StateSet target(cgm.num_states());
    for (std::size_t s = 0; s < target.size(); ++s) target[s] = rng() % 2;

    // pre(T) = [[<<C>>X t]] where t labels T
    Cgm::Explicit d;
    d.agents = {"A", "B"};
    d.num_states = cgm.num_states();
    for (AgentId a = 0; a < 2; ++a) {
      d.actions.push_back(cgm.actions(a));
      std::vector<std::vector<ActionId>> en;
      for (StateId s = 0; s < cgm.num_states(); ++s) {
        auto span = cgm.enabled(a, s);
        en.emplace_back(span.begin(), span.end());
      }
      d.enabled.push_back(en);
    }
    d.transitions.assign(cgm.num_states(), std::vector<StateId>(cgm.num_joint(), 0));
    for (StateId s = 0; s < cgm.num_states(); ++s)
      for (std::size_t j = 0; j < cgm.num_joint(); ++j)
        if (cgm.transition(s, j) >= 0) d.transitions[s][j] = static_cast<StateId>(cgm.transition(s, j));
    for (StateId s = 0; s < cgm.num_states(); ++s)
      if (target.test(s)) d.propositions["t"].push_back(s);
    d.propositions.try_emplace("t");
    auto labeled = Cgm::from_explicit(d);
    auto f = Formula::temporal(Formula::Kind::X, "c", coalition, {Formula::atom("t")});
    CHECK(pre(cgm, coalition, target) == from_bools(oracle::satisfying(labeled, f)));
  }
}

TEST_CASE("labeling agrees with the minimax oracle") {
  std::mt19937 rng(3);
  for (int i = 0; i < 150; ++i) {
    auto cgm = oracle::random_model(rng, 2 + rng() % 5, 3);
    auto f = oracle::random_formula(rng, 3);
    CHECK(satisfying_states(cgm, f) == from_bools(oracle::satisfying(cgm, f)));
  }
}

TEST_CASE("fixpoint identities") {
  std::mt19937 rng(5);
  const std::vector<AgentId> all{0, 1}, none{}, first{0};
  for (int i = 0; i < 60; ++i) {
    auto cgm = oracle::random_model(rng, 2 + rng() % 6, 3);
    auto p = Formula::atom("p"), q = Formula::atom("q");
    auto top = Formula::disjunction(p, Formula::negation(p));
    auto sat = [&](Formula f) { return satisfying_states(cgm, f); };
    // F φ = ⊤ U φ
    CHECK(sat(Formula::temporal(Formula::Kind::F, "c0", first, {q})) ==
          sat(Formula::temporal(Formula::Kind::U, "c0", first, {top, q})));
    // a larger coalition can do at least as much
    for (auto k : {Formula::Kind::X, Formula::Kind::F, Formula::Kind::G}) {
      auto small = sat(Formula::temporal(k, "c", none, {q}));
      auto mid = sat(Formula::temporal(k, "c0", first, {q}));
      auto big = sat(Formula::temporal(k, "c01", all, {q}));
      CHECK(subset(small, mid));
      CHECK(subset(mid, big));
    }
    // G φ ⊆ [[φ]] ⊆ F φ
    CHECK(subset(sat(Formula::temporal(Formula::Kind::G, "c0", first, {p})), sat(p)));
    CHECK(subset(sat(p), sat(Formula::temporal(Formula::Kind::F, "c0", first, {p}))));
    // a stronger target is harder to reach
    auto pq = Formula::conjunction(p, q);
    CHECK(subset(sat(Formula::temporal(Formula::Kind::F, "c0", first, {pq})),
                 sat(Formula::temporal(Formula::Kind::F, "c0", first, {p}))));
  }
}

TEST_CASE("synthesized strategies are sound") {
  std::mt19937 rng(17);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto cgm = oracle::random_model(rng, 2 + rng() % 6, 3);
    auto f = oracle::random_formula(rng, 2);
    if (!f.is_strategic()) continue;
    auto res = check(cgm, f, cgm.empty_set());
    REQUIRE(res.strategy);
    const auto& st = *res.strategy;
    const std::size_t n = cgm.num_states();
    for (auto s = res.satisfying.find_first(); s != StateSet::npos; s = res.satisfying.find_next(s)) {
      const auto state = static_cast<StateId>(s);
      switch (st.objective) {
        case StrategyMap::Objective::Reach:
        case StrategyMap::Objective::Until:
          CHECK(oracle::reach_sound(cgm, st, state, n));
          break;
        case StrategyMap::Objective::Safety:
          CHECK(oracle::safety_sound(cgm, st, st.goal, state, n + 1));
          break;
        case StrategyMap::Objective::Next:
          CHECK(oracle::reach_sound(cgm, st, state, 1));
          break;
        default: break;
      }
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("goldseeker goal matches cooperative search") {
  auto spec = fixture::goldseeker_spec();
  auto cgm = build_cgm(spec, fixture::zero_locals(spec));
  auto goal = cgm.empty_set(), taken = cgm.empty_set();
  for (StateId s = 0; s < cgm.num_states(); ++s) {
    auto v = cgm.decode(s);
    goal[s] = v[0] == 3 && v[1] == 2 && v[2] == 3 && v[3] == 2 && v[5] == 0 && v[6] == 0;
    taken[s] = v[4] == 1;
  }
  auto res = check(cgm, spec.formulas[0], cgm.empty_set());
  for (StateId s = 0; s < cgm.num_states(); ++s)
    CHECK(res.satisfying.test(s) == oracle::cooperative_reach_then_step(cgm, s, goal, taken));
  // unmined agents win from every position pair
  for (StateId s = 0; s < cgm.num_states(); ++s) {
    auto v = cgm.decode(s);
    if (v[5] == 0 && v[6] == 0) CHECK(res.satisfying.test(s));
  }

  REQUIRE(res.strategy);
  CHECK(res.strategy->objective == StrategyMap::Objective::Reach);
  auto start = fixture::gs_state(cgm, 1, 0, 0, 1);
  CHECK(oracle::reach_sound(cgm, *res.strategy, start, cgm.num_states()));
  const StateId target = fixture::gs_state(cgm, 3, 2, 3, 2);
  CHECK(res.strategy->finish.count(target) == 1);
  CHECK(cgm.successor(target, complete_move(cgm, target, res.strategy->finish_coalition,
                                            res.strategy->finish.at(target))) ==
        fixture::gs_state(cgm, 3, 2, 3, 2, true, true, true));

  // BA from (2,0) with RA at (0,1): the body ends with mine and reaches the goal
  auto from = fixture::gs_state(cgm, 2, 0, 0, 1);
  auto body = linearize(cgm, *res.strategy, single(cgm, from), 0, cgm.num_states());
  REQUIRE_FALSE(body.empty());
  CHECK(cgm.actions(0)[body.back()] == "mine");
}

TEST_CASE("uniform strategies for goldseeker") {
  auto spec = fixture::goldseeker_spec();
  auto cgm = build_cgm(spec, fixture::zero_locals(spec));
  auto v = [&](const char* n) { return fixture::var(spec, n); };

  BeliefState stuck;
  stuck.fixed[v("treasureMined")] = 0;
  stuck.known[v("rowBA")] = 2;
  stuck.known[v("columnBA")] = 0;
  stuck.possible[v("columnRA")] = {1, 2};
  stuck.possible[v("rowRA")] = {0, 1, 2, 3};
  // BA observes only its own flag, so it cannot tell the positions apart
  CHECK_FALSE(find_uniform_strategy(cgm, spec.formulas[0], stuck, 0));

  BeliefState there;
  there.fixed[v("treasureMined")] = 0;
  there.known[v("rowBA")] = 3;
  there.known[v("columnBA")] = 2;
  there.known[v("rowRA")] = 3;
  there.known[v("columnRA")] = 2;
  auto st = find_uniform_strategy(cgm, spec.formulas[0], there, 0);
  REQUIRE(st);
  auto body = linearize(cgm, *st, there, 0, cgm.num_states());
  REQUIRE(body.size() == 1);
  CHECK(cgm.actions(0)[body[0]] == "mine");
}

TEST_CASE("linearization limits") {
  auto spec = fixture::goldseeker_spec();
  auto cgm = build_cgm(spec, fixture::zero_locals(spec));
  auto res = check(cgm, spec.formulas[0], cgm.empty_set());
  auto from = single(cgm, fixture::gs_state(cgm, 0, 0, 0, 2));
  CHECK_THROWS_WITH_AS(linearize(cgm, *res.strategy, from, 0, 0), doctest::Contains("horizon exceeded"), StrategyError);
  CHECK_THROWS_WITH_AS(linearize(cgm, *res.strategy, from, 0, 3), doctest::Contains("horizon exceeded"), StrategyError);
  CHECK_NOTHROW(linearize(cgm, *res.strategy, from, 0, cgm.num_states()));

  auto flip = fixture::flip_spec();
  auto fcgm = build_cgm(flip, {});
  auto always = check(fcgm, flip.formulas[1], single(fcgm, 1));
  CHECK_THROWS_WITH_AS(linearize(fcgm, *always.strategy, single(fcgm, 1), 0, 5),
                       doctest::Contains("non-linearizable goal"), StrategyError);
}

TEST_CASE("reach strategies lower the rank on every move") {
  std::mt19937 rng(23);
  for (int i = 0; i < 80; ++i) {
    auto cgm = oracle::random_model(rng, 2 + rng() % 6, 3);
    auto f = Formula::temporal(Formula::Kind::F, "c0", {0}, {Formula::atom("p")});
    auto res = check(cgm, f, cgm.empty_set());
    REQUIRE(res.strategy);
    const auto& st = *res.strategy;
    for (const auto& [s, move] : st.choice) {
      CHECK(st.rank[s] > 0);
      for (ActionId y : cgm.enabled(1, s)) {
        JointAction joint{move[0], y};
        CHECK(st.rank[cgm.successor(s, joint)] < st.rank[s]);
        CHECK(st.rank[cgm.successor(s, joint)] >= 0);
      }
    }
  }
}
