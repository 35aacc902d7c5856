#include <doctest.h>

#include "atlforge/agentspeak.hpp"
#include "atlforge/error.hpp"
#include "fixtures.hpp"

using namespace atlforge;

namespace {

BeliefState stuck_belief(const ModelSpec& spec) {
  BeliefState b;
  b.fixed[fixture::var(spec, "treasureMined")] = 0;
  b.known[fixture::var(spec, "rowBA")] = 2;
  b.known[fixture::var(spec, "columnBA")] = 0;
  b.possible[fixture::var(spec, "rowRA")] = {0, 1, 2, 3};
  b.possible[fixture::var(spec, "columnRA")] = {1, 2};
  return b;
}

int load_error_line(const std::string& text) {
  try {
    load(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("guard for the documented belief") {
  auto spec = fixture::goldseeker_spec();
  auto guard = make_guard(spec, stuck_belief(spec));
  CHECK(format_guard(guard) ==
        "treasuremined(false) & columnba(0) & rowba(2) & poss(columnra(1)) & poss(columnra(2)) & poss(rowra(0)) & "
        "poss(rowra(1)) & poss(rowra(2)) & poss(rowra(3))");
  REQUIRE(guard.size() == 9);
  CHECK(guard[0] == GuardAtom{GuardAtom::Kind::Known, "treasuremined", "false"});
  CHECK(guard[3] == GuardAtom{GuardAtom::Kind::Possible, "columnra", "1"});
}

TEST_CASE("guard keys ignore atom order") {
  std::vector<GuardAtom> a{{GuardAtom::Kind::Known, "x", "1"}, {GuardAtom::Kind::Possible, "y", "2"}};
  std::vector<GuardAtom> b{a[1], a[0]};
  CHECK(guard_key(a) == guard_key(b));
  std::vector<GuardAtom> c{{GuardAtom::Kind::Known, "x", "1"}, {GuardAtom::Kind::Known, "y", "2"}};
  CHECK(guard_key(a) != guard_key(c));
  CHECK(format_guard(std::vector<GuardAtom>{}) == "true");
}

TEST_CASE("emitted layout") {
  Plan p{"gettreasure",
         {{GuardAtom::Kind::Known, "rowba", "3"}, {GuardAtom::Kind::Possible, "rowra", "2"}},
         {"mine"},
         {}};
  CHECK(emit(std::vector<Plan>{p}) ==
        "+!gettreasure:\n\trowba(3) & poss(rowra(2))\n\t<-\n\t.drop_all_intentions; mine; true.\n");
  Plan q = p;
  q.body = {"down", "right"};
  q.successor = "rest";
  CHECK(emit(std::vector<Plan>{p, q}) ==
        "+!gettreasure:\n\trowba(3) & poss(rowra(2))\n\t<-\n\t.drop_all_intentions; mine; true.\n\n"
        "+!gettreasure:\n\trowba(3) & poss(rowra(2))\n\t<-\n\t.drop_all_intentions; down; right; !rest.\n");
  Plan empty = p;
  empty.body.clear();
  CHECK_THROWS_AS(emit(std::vector<Plan>{empty}), Error);
}

TEST_CASE("load reverses emit") {
  std::vector<Plan> plans{
      {"a", {{GuardAtom::Kind::Known, "flag", "true"}}, {"x"}, {}},
      {"a", {}, {"x", "y"}, std::string("b")},
      {"b", {{GuardAtom::Kind::Possible, "v", "-1"}, {GuardAtom::Kind::Possible, "v", "4"}}, {"z"}, {}},
  };
  CHECK(load(emit(plans)) == plans);
  CHECK(load("").empty());
  CHECK(load("\n  \n").empty());
}

TEST_CASE("load rejects text outside the subset") {
  const std::string good = "+!g:\n\tx(1)\n\t<-\n\t.drop_all_intentions; a; true.\n";
  CHECK_NOTHROW(load(good));
  CHECK(load_error_line("+!g:\n\tx(one)\n\t<-\n\t.drop_all_intentions; a; true.\n") == 2);
  CHECK(load_error_line("+!g:\n\tx(1)\n\t<-\n\t.drop_all_intentions; true.\n") == 4);
  CHECK(load_error_line("// note\n" + good) == 1);
  CHECK(load_error_line(good + "/* more */\n") == 5);
  CHECK(load_error_line("+!g:\n\tx(1)\n\t<-\n\t.drop_all_intentions; a; true\n") != -1);
  CHECK(load_error_line("!g:\n\tx(1)\n\t<-\n\t.drop_all_intentions; a; true.\n") == 1);
}
