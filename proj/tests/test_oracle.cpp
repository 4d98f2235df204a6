#include <random>

#include "doctest.h"
#include "qbfplan/oracle.hpp"
#include "support/random_qbf.hpp"

using namespace qbfplan;

namespace {

// Complement of the matrix built from its truth table: one clause per
// satisfying assignment, under the dual prefix.
QbfFormula negation(const QbfFormula& f) {
  QbfFormula g;
  for (const auto& b : f.prefix().blocks()) {
    g.add_block(b.quantifier == Quantifier::Exists ? Quantifier::Forall : Quantifier::Exists,
                b.variables);
  }
  Var n = f.prefix().max_var();
  auto clauses = f.clauses();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool sat = true;
    for (const auto& c : clauses) {
      bool any = false;
      for (auto l : c) any = any || (((mask >> (l.var() - 1)) & 1u) == (l.is_positive() ? 1u : 0u));
      if (!any) {
        sat = false;
        break;
      }
    }
    if (!sat) continue;
    std::vector<Literal> block;
    for (Var v = 1; v <= n; ++v) block.emplace_back(v, ((mask >> (v - 1)) & 1u) != 0);
    g.add_clause(block);
  }
  return g;
}

}  // namespace

TEST_CASE("evaluate on small prefixes") {
  QbfFormula ae;
  ae.add_block(Quantifier::Forall, {1});
  ae.add_block(Quantifier::Exists, {2});
  ae.add_clause({1, -2});
  ae.add_clause({-1, 2});
  CHECK(evaluate(ae).status == QbfStatus::Sat);
  CHECK_FALSE(evaluate(ae).outer_witness.has_value());
  CHECK(testing::naive_eval(ae));

  QbfFormula ea;
  ea.add_block(Quantifier::Exists, {1});
  ea.add_block(Quantifier::Forall, {2});
  ea.add_clause({1, 2});
  ea.add_clause({-1, -2});
  CHECK(evaluate(ea).status == QbfStatus::Unsat);
  CHECK_FALSE(testing::naive_eval(ea));
}

TEST_CASE("outer witness prefers false") {
  QbfFormula f;
  f.add_block(Quantifier::Exists, {1, 2});
  f.add_clause({1, 2});
  auto r = evaluate(f);
  REQUIRE(r.status == QbfStatus::Sat);
  REQUIRE(r.outer_witness.has_value());
  CHECK(*r.outer_witness == Assignment{{1, false}, {2, true}});
}

TEST_CASE("empty matrix and empty clause") {
  QbfFormula f;
  f.add_block(Quantifier::Forall, {1});
  CHECK(evaluate(f).status == QbfStatus::Sat);
  f.add_clause(std::vector<Literal>{});
  CHECK(evaluate(f).status == QbfStatus::Unsat);
  QbfFormula none;
  CHECK(evaluate(none).status == QbfStatus::Sat);
}

TEST_CASE("variable cap") {
  QbfFormula f;
  std::vector<Var> vs;
  for (Var v = 1; v <= 31; ++v) vs.push_back(v);
  f.add_block(Quantifier::Exists, vs);
  CHECK_THROWS_AS(evaluate(f), FormulaError);
  CHECK(evaluate(f, OracleOptions{31}).status == QbfStatus::Sat);
}

TEST_CASE("evaluate_under requires a prefix-closed assignment") {
  QbfFormula f;
  f.add_block(Quantifier::Exists, {1, 2});
  f.add_block(Quantifier::Forall, {3});
  f.add_block(Quantifier::Exists, {4});
  f.add_clause({1, 3, 4});
  f.add_clause({-3, -4});
  f.add_clause({1, -4});
  CHECK_NOTHROW(evaluate_under(f, {{1, true}}));
  CHECK_NOTHROW(evaluate_under(f, {{1, true}, {2, false}, {3, true}}));
  CHECK_THROWS_AS(evaluate_under(f, {{1, true}, {3, true}}), FormulaError);
  CHECK_THROWS_AS(evaluate_under(f, {{4, true}}), FormulaError);
  CHECK_THROWS_AS(evaluate_under(f, {{9, true}}), FormulaError);
  CHECK(evaluate_under(f, {{1, false}, {2, false}}) == QbfStatus::Unsat);
  CHECK(evaluate_under(f, {{1, true}, {2, false}}) == QbfStatus::Sat);
}

TEST_CASE("evaluate agrees with leaf-only evaluation") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    auto f = testing::random_qbf(rng);
    CHECK(evaluate(f).status == (testing::naive_eval(f) ? QbfStatus::Sat : QbfStatus::Unsat));
  }
}

TEST_CASE("outer witness is a real witness") {
  std::mt19937_64 rng(22);
  int witnessed = 0;
  for (int i = 0; i < 300; ++i) {
    auto f = testing::random_qbf(rng);
    auto r = evaluate(f);
    if (!r.outer_witness) continue;
    ++witnessed;
    CHECK(r.outer_witness->size() == f.prefix().block(1).variables.size());
    CHECK(evaluate_under(f, *r.outer_witness) == QbfStatus::Sat);
  }
  CHECK(witnessed > 10);
}

TEST_CASE("a formula and its complement disagree") {
  std::mt19937_64 rng(23);
  testing::RandomQbfParams p;
  p.max_vars = 8;
  for (int i = 0; i < 200; ++i) {
    auto f = testing::random_qbf(rng, p);
    auto g = negation(f);
    CHECK(evaluate(f).status != evaluate(g).status);
  }
}
