#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qbfplan/dungeon.hpp"
#include "qbfplan/grounder.hpp"
#include "qbfplan/workflow.hpp"
#include "support/plan_search.hpp"

using namespace qbfplan;

namespace {

DungeonParams tiny(int pools, int items, int monsters, int recipes, int unknowns, std::uint64_t seed) {
  DungeonParams p;
  p.pools = pools;
  p.items_per_pool = items;
  p.monsters = monsters;
  p.recipes = recipes;
  p.unknown_items = unknowns;
  p.seed = seed;
  return p;
}

bool is_pick(const std::string& step) { return step.rfind("(pick ", 0) == 0; }
bool is_fight(const std::string& step) { return step.rfind("(fight-", 0) == 0; }

}  // namespace

TEST_CASE("one pool, one item, one monster") {
  DungeonParams p = tiny(1, 1, 1, 0, 0, 1);
  p.max_forbidden = 0;
  DungeonInstance inst = generate(p);
  CHECK(inst.name == "dungeon-v0-p1x1-m1-r0-u0-s1");
  LiftedInstance l = parse_pddl(inst.domain, inst.problem);
  WorkflowConfig config;
  config.upper_bound = 5;
  WorkflowResult r = run_workflow(l, config);
  REQUIRE(r.outcome == WorkflowOutcome::PlanFound);
  CHECK(r.k == 2);
  CHECK(r.verified);
  CHECK(r.plan == Plan{{"(pick i1-1 p1)", "(fight-m1)"}});
  // Independent minimality check.
  GroundInstance g = ground_upto(l, 4);
  auto search = testing::shortest_plan(g, 4);
  REQUIRE(search.min_length.has_value());
  CHECK(*search.min_length == 2);
}

TEST_CASE("no monsters means an empty goal disjunction") {
  DungeonInstance inst = generate(tiny(2, 2, 0, 1, 1, 3));
  LiftedInstance l = parse_pddl(inst.domain, inst.problem);
  REQUIRE(l.goal.size() == 1);
  CHECK(l.goal[0].empty());
  CHECK(lower_bound(l) == kInfiniteBound);
}

TEST_CASE("generation is deterministic") {
  DungeonParams p = tiny(3, 2, 2, 2, 2, 17);
  DungeonInstance a = generate(p);
  DungeonInstance b = generate(p);
  CHECK(a.domain == b.domain);
  CHECK(a.problem == b.problem);
  p.seed = 18;
  DungeonInstance c = generate(p);
  CHECK(c.name != a.name);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(generate(tiny(-1, 1, 1, 0, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate(tiny(1, 1, 1, 0, 5, 1)), std::invalid_argument);
  CHECK_THROWS_AS(parse_variant("v2"), std::invalid_argument);
  CHECK(parse_variant("v1") == DungeonVariant::V1);
  CHECK(to_string(DungeonVariant::V0) == "v0");
}

TEST_CASE("random parameters always produce parseable instances") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 200; ++round) {
    DungeonParams p = tiny(testing::uniform(rng, 0, 5), testing::uniform(rng, 0, 4), testing::uniform(rng, 0, 5),
                           testing::uniform(rng, 0, 4), 0, static_cast<std::uint64_t>(round));
    p.unknown_items = testing::uniform(rng, 0, p.total_items());
    p.variant = round % 2 ? DungeonVariant::V1 : DungeonVariant::V0;
    p.max_required = testing::uniform(rng, 1, 3);
    p.max_forbidden = testing::uniform(rng, 0, 2);
    p.max_ingredients = testing::uniform(rng, 2, 3);
    p.max_absorbed = testing::uniform(rng, 0, 2);
    DungeonInstance inst = generate(p);
    LiftedInstance l;
    CHECK_NOTHROW(l = parse_pddl(inst.domain, inst.problem));
    CHECK(l.init_unknown.size() == static_cast<std::size_t>(p.unknown_items));
    CHECK(l.goal.size() == 1);
  }
}

TEST_CASE("suite manifest and size ladder") {
  SuiteSpec spec;
  spec.count = 10;
  spec.smallest = tiny(1, 1, 1, 0, 0, 1);
  spec.largest = tiny(5, 3, 4, 3, 6, 1);
  spec.base_seed = 100;
  auto entries = generate_suite(spec);
  REQUIRE(entries.size() == 10);
  std::string manifest = suite_manifest(entries);
  std::istringstream lines(manifest);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("id=dv0-", 0) == 0);
    ++rows;
  }
  CHECK(rows == 10);
  CHECK(manifest.find("id=dv0-000 variant=v0 pools=1 ") == 0);
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const auto& a = entries[i - 1].params;
    const auto& b = entries[i].params;
    CHECK(a.pools <= b.pools);
    CHECK(a.items_per_pool <= b.items_per_pool);
    CHECK(a.monsters <= b.monsters);
    CHECK(a.recipes <= b.recipes);
    CHECK(a.unknown_items <= b.unknown_items);
    CHECK(b.seed == a.seed + 1);
  }
  auto again = generate_suite(spec);
  CHECK(suite_manifest(again) == manifest);
  for (std::size_t i = 0; i < entries.size(); ++i) CHECK(again[i].instance.problem == entries[i].instance.problem);

  auto dir = std::filesystem::temp_directory_path() / "qbfplan-suite-test";
  std::filesystem::remove_all(dir);
  write_suite(entries, dir);
  CHECK(std::filesystem::exists(dir / "manifest.txt"));
  CHECK(std::filesystem::exists(dir / "dv0-009.domain.pddl"));
  std::ifstream in(dir / "dv0-003.problem.pddl");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == entries[3].instance.problem);
  std::filesystem::remove_all(dir);
}

TEST_CASE("v0 forbids picking after the first fight, v1 allows it") {
  for (auto variant : {DungeonVariant::V0, DungeonVariant::V1}) {
    DungeonParams p = tiny(3, 2, 3, 2, 2, 5);
    p.variant = variant;
    LiftedInstance l = parse_pddl(generate(p).domain, generate(p).problem);
    GroundInstance g = ground_upto(l, 6);
    auto entered = g.find_fluent("(entered)");
    REQUIRE(entered.has_value());
    for (const auto& a : g.actions) {
      if (is_fight(a.name)) continue;
      bool guarded = std::find(a.precondition.begin(), a.precondition.end(), FluentLiteral{*entered, true}) !=
                     a.precondition.end();
      CHECK(guarded == (variant == DungeonVariant::V0));
    }
  }
}

TEST_CASE("decoded v0 plans never pick after a fight") {
  SuiteSpec spec;
  spec.count = 12;
  spec.smallest = tiny(1, 1, 1, 0, 0, 1);
  spec.largest = tiny(4, 3, 3, 2, 4, 1);
  spec.base_seed = 40;
  int plans = 0;
  for (const auto& e : generate_suite(spec)) {
    LiftedInstance l = parse_pddl(e.instance.domain, e.instance.problem);
    WorkflowConfig config;
    config.upper_bound = 6;
    WorkflowResult r = run_workflow(l, config);
    if (r.outcome != WorkflowOutcome::PlanFound) continue;
    ++plans;
    CHECK(r.verified);
    bool fought = false;
    for (const auto& step : r.plan.steps) {
      if (is_fight(step)) fought = true;
      CHECK_FALSE((fought && is_pick(step)));
    }
  }
  CHECK(plans >= 6);
}
