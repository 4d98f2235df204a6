#include <algorithm>
#include <random>

#include "doctest.h"
#include "qbfplan/encoder.hpp"
#include "qbfplan/grounder.hpp"
#include "qbfplan/oracle.hpp"
#include "support/plan_search.hpp"

using namespace qbfplan;

namespace {

struct Solved {
  SolveStatus status = SolveStatus::Unknown;
  std::optional<Assignment> outer;
};

Solved solve(const QbfFormula& f) {
  Solver s;
  s.load(f);
  SolveOutcome out = s.solve();
  return {out.status, out.outer_assignment};
}

// Clause multiset and prefix with variables replaced by encoder names.
struct NamedFormula {
  std::vector<std::pair<Quantifier, std::vector<std::string>>> blocks;
  std::vector<std::vector<std::string>> clauses;
  bool operator==(const NamedFormula&) const = default;
};

NamedFormula named(const QbfFormula& f, const Encoder& enc) {
  NamedFormula n;
  Prefix prefix = f.prefix().normalized();
  for (const auto& b : prefix.blocks()) {
    std::vector<std::string> vars;
    for (Var v : b.variables) vars.push_back(enc.variable_name(v));
    std::sort(vars.begin(), vars.end());
    n.blocks.emplace_back(b.quantifier, vars);
  }
  for (const auto& c : f.clauses()) {
    std::vector<std::string> lits;
    for (auto l : c) lits.push_back((l.is_negative() ? "-" : "+") + enc.variable_name(l.var()));
    std::sort(lits.begin(), lits.end());
    n.clauses.push_back(lits);
  }
  std::sort(n.clauses.begin(), n.clauses.end());
  return n;
}

bool has_clause(const QbfFormula& f, const Encoder& enc, std::vector<std::string> lits) {
  std::sort(lits.begin(), lits.end());
  auto n = named(f, enc);
  return std::find(n.clauses.begin(), n.clauses.end(), lits) != n.clauses.end();
}

GroundInstance single_action(bool goal_initially_true) {
  GroundInstance g;
  g.fluents = {"(g)"};
  if (goal_initially_true) g.init_true = {0};
  GroundAction a;
  a.name = "(a)";
  a.add = {0};
  g.actions = {a};
  g.goal = {{{0, false}}};
  g.grounded_upto = 3;
  return g;
}

const char* kChainDomain = R"(
(define (domain chain)
  (:requirements :strips)
  (:predicates (p0) (p1) (p2))
  (:action a1 :parameters () :precondition (p0) :effect (p1))
  (:action a2 :parameters () :precondition (p1) :effect (and (p2) (not (p0)))))
)";
const char* kChainProblem = "(define (problem c) (:domain chain) (:init (p0)) (:goal (p2)))";

}  // namespace

TEST_CASE("goal true at time 0") {
  GroundInstance g = single_action(true);
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(0);
  Solved r = solve(f);
  CHECK(r.status == SolveStatus::Sat);
  CHECK(enc.decode_plan(r.outer.value_or(Assignment{})).steps.empty());
  CHECK(evaluate(f).status == QbfStatus::Sat);
}

TEST_CASE("single action reaches the goal at length 1") {
  GroundInstance g = single_action(false);
  Solver s;
  SolverTarget target(s);
  Encoder enc(target, g);
  enc.encode_initial(0);
  CHECK(s.solve().status == SolveStatus::Unsat);
  CHECK(evaluate(s.snapshot()).status == QbfStatus::Unsat);
  enc.extend_to(g, 1);
  SolveOutcome out = s.solve();
  REQUIRE(out.status == SolveStatus::Sat);
  CHECK(evaluate(s.snapshot()).status == QbfStatus::Sat);
  CHECK(enc.decode_plan(*out.outer_assignment) == Plan{{"(a)"}});
}

TEST_CASE("unknown goal without actions is never reachable") {
  GroundInstance g;
  g.fluents = {"(u)"};
  g.init_unknown = {0};
  g.goal = {{{0, false}}};
  g.grounded_upto = 2;
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(0);
  for (int k = 0; k <= 2; ++k) {
    if (k > 0) enc.extend_to(g, k);
    CHECK(evaluate(f).status == QbfStatus::Unsat);
    CHECK(solve(f).status == SolveStatus::Unsat);
  }
}

TEST_CASE("extensions replace the goal frame and grow f0") {
  GroundInstance g = single_action(false);
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(0);
  auto f0_size = [&] { return f.frames().front().clauses.size(); };
  std::size_t before = f0_size();
  CHECK(f.frames().size() == 2);
  enc.extend_to(g, 1);
  std::size_t middle = f0_size();
  enc.extend_to(g, 2);
  CHECK(f.frames().size() == 2);
  CHECK(before < middle);
  CHECK(middle < f0_size());
  CHECK(enc.map().k == 2);
  CHECK(f.frames().back().id == *enc.map().f1);
  CHECK(f.frames().back().clauses.size() == 1);
  CHECK_THROWS_AS(enc.extend_to(g, 4), std::invalid_argument);
}

TEST_CASE("prefix shape and variable names") {
  GroundInstance g = single_action(false);
  g.fluents.push_back("(u)");
  g.init_unknown = {1};
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(1);
  const auto& blocks = f.prefix().blocks();
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].quantifier == Quantifier::Exists);
  CHECK(blocks[1].quantifier == Quantifier::Forall);
  CHECK(blocks[2].quantifier == Quantifier::Exists);
  CHECK(blocks[0].variables.size() == 2);
  CHECK(enc.variable_name(blocks[0].variables[0]) == "a:noop@0");
  CHECK(enc.variable_name(blocks[0].variables[1]) == "a:(a)@0");
  CHECK(enc.variable_name(blocks[1].variables[0]) == "u:(u)");
  CHECK(enc.variable_name(enc.map().state_var(0, 1)) == "s:(g)@1");
  CHECK(blocks[2].variables.size() == 4);
  // The universal is linked to its time-0 state variable both ways.
  CHECK(has_clause(f, enc, {"-u:(u)", "+s:(u)@0"}));
  CHECK(has_clause(f, enc, {"+u:(u)", "-s:(u)@0"}));
  CHECK(has_clause(f, enc, {"-s:(g)@0"}));
  CHECK_THROWS_AS(enc.variable_name(999), std::out_of_range);
}

TEST_CASE("encoding beyond the grounding is rejected") {
  GroundInstance g = single_action(false);
  g.grounded_upto = 1;
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  CHECK_THROWS_AS(enc.encode_initial(2), EncodingError);
}

TEST_CASE("newly grounded fluents are false at time 0") {
  LiftedInstance l = parse_pddl(kChainDomain, kChainProblem);
  Grounder gr(l);
  GroundInstance g = gr.ground_upto(0);
  REQUIRE_FALSE(g.find_fluent("(p1)").has_value());
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(0);
  gr.extend(g, 1);
  enc.extend_to(g, 1);
  REQUIRE(g.find_fluent("(p1)").has_value());
  CHECK(has_clause(f, enc, {"-s:(p1)@0"}));
  CHECK(solve(f).status == SolveStatus::Unsat);
  gr.extend(g, 2);
  enc.extend_to(g, 2);
  Solved r = solve(f);
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(enc.decode_plan(*r.outer) == Plan{{"(a1)", "(a2)"}});
}

TEST_CASE("decoding") {
  GroundInstance g = single_action(true);
  QbfFormula f;
  FormulaTarget target(f);
  Encoder enc(target, g);
  enc.encode_initial(2);
  const auto& m = enc.map();
  Assignment a;
  for (const auto& step : m.action_vars) {
    for (auto [id, v] : step) a[v] = false;
  }
  a[m.action_var(kNoopAction, 0)] = true;
  a[m.action_var(0, 1)] = true;
  CHECK(enc.decode_plan(a) == Plan{{"noop", "(a)"}});
  a[m.action_var(0, 0)] = true;
  CHECK_THROWS_AS(enc.decode_plan(a), std::logic_error);
  a[m.action_var(0, 0)] = false;
  a[m.action_var(kNoopAction, 0)] = false;
  CHECK_THROWS_AS(enc.decode_plan(a), std::logic_error);
}

TEST_CASE("random tiny instances: QBF_k sat iff a k-plan exists") {
  std::mt19937_64 rng(2024);
  int sat = 0, unsat = 0, oracle_checked = 0;
  for (int round = 0; round < 150; ++round) {
    testing::TinyProblem t = testing::random_tiny_problem(rng);
    GroundInstance full = testing::to_ground(t, 3);
    auto search = testing::shortest_plan(full, 3);
    REQUIRE(search.exhausted);
    for (int k = 0; k <= 3; ++k) {
      GroundInstance g = testing::to_ground(t, k);
      QbfFormula f;
      FormulaTarget target(f);
      Encoder enc(target, g);
      enc.encode_initial(k);
      bool expected = search.min_length && *search.min_length <= k;
      Solved r = solve(f);
      REQUIRE(r.status != SolveStatus::Unknown);
      CHECK((r.status == SolveStatus::Sat) == expected);
      if (f.prefix().variable_count() <= 18) {
        ++oracle_checked;
        CHECK((evaluate(f).status == QbfStatus::Sat) == expected);
      }
      if (r.status == SolveStatus::Sat) {
        ++sat;
        Plan p = enc.decode_plan(*r.outer);
        CHECK(p.length() == static_cast<std::size_t>(k));
        CHECK(testing::plan_succeeds(g, p));
        CHECK(verify_plan(g, p).valid());
      } else {
        ++unsat;
      }
    }
  }
  CHECK(sat > 50);
  CHECK(unsat > 50);
  CHECK(oracle_checked > 50);
}

TEST_CASE("incremental extension equals a monolithic encoding") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 150; ++round) {
    testing::TinyProblem t = testing::random_tiny_problem(rng);
    auto [d, p] = testing::to_pddl(t);
    LiftedInstance l = parse_pddl(d, p);
    Grounder gr(l);
    GroundInstance g = gr.ground_upto(0);
    QbfFormula inc;
    FormulaTarget inc_target(inc);
    Encoder inc_enc(inc_target, g);
    inc_enc.encode_initial(0);
    Solver solver;
    SolverTarget solver_target(solver);
    GroundInstance g_solver = g;
    Encoder solver_enc(solver_target, g_solver);
    solver_enc.encode_initial(0);
    for (int k = 1; k <= 3; ++k) {
      gr.extend(g, k);
      g_solver = g;
      inc_enc.extend_to(g, k);
      solver_enc.extend_to(g_solver, k);

      GroundInstance fresh = ground_upto(l, k);
      QbfFormula mono;
      FormulaTarget mono_target(mono);
      Encoder mono_enc(mono_target, fresh);
      mono_enc.encode_initial(k);
      CHECK(named(inc, inc_enc) == named(mono, mono_enc));
      CHECK(named(solver.snapshot(), solver_enc) == named(mono, mono_enc));
      CHECK(write_qdimacs(inc) == write_qdimacs(solver.snapshot()));

      SolveOutcome out = solver.solve();
      Solved expected = solve(mono);
      CHECK(out.status == expected.status);
      if (out.status == SolveStatus::Sat) CHECK(verify_plan(g, solver_enc.decode_plan(*out.outer_assignment)).valid());
    }
  }
}

TEST_CASE("encoding is deterministic") {
  std::mt19937_64 rng(3);
  testing::TinyProblem t = testing::random_tiny_problem(rng);
  GroundInstance g = testing::to_ground(t, 2);
  auto text = [&] {
    QbfFormula f;
    FormulaTarget target(f);
    Encoder enc(target, g);
    enc.encode_initial(2);
    return write_qdimacs(f);
  };
  CHECK(text() == text());
}
