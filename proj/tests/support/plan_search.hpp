#pragma once

// Test-only conformant planning helpers: a random tiny-problem generator
// that emits both PDDL text and a ground instance, and a breadth-first
// search over belief states that shares no code with the library's
// verifier, grounder or encoder.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qbfplan/planning.hpp"
#include "support/random_qbf.hpp"

namespace qbfplan::testing {

struct TinyAction {
  std::vector<std::pair<int, bool>> pre;  // (fluent, negated)
  std::vector<int> add;
  std::vector<int> del;
};

struct TinyProblem {
  int fluents = 0;
  std::vector<TinyAction> actions;
  std::vector<int> init_true;
  std::vector<int> unknown;
  std::vector<std::vector<std::pair<int, bool>>> goal;
};

struct TinyParams {
  int max_fluents = 6;
  int max_actions = 4;
  int max_unknowns = 3;
};

inline std::vector<int> pick_distinct(std::mt19937_64& rng, int n, int count) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(std::min(n, count)));
  std::sort(all.begin(), all.end());
  return all;
}

inline TinyProblem random_tiny_problem(std::mt19937_64& rng, const TinyParams& p = {}) {
  TinyProblem t;
  t.fluents = uniform(rng, 1, p.max_fluents);
  t.unknown = pick_distinct(rng, t.fluents, uniform(rng, 0, std::min(p.max_unknowns, t.fluents)));
  for (int f = 0; f < t.fluents; ++f) {
    bool unknown = std::find(t.unknown.begin(), t.unknown.end(), f) != t.unknown.end();
    if (!unknown && uniform(rng, 0, 2) == 0) t.init_true.push_back(f);
  }
  int actions = uniform(rng, 0, p.max_actions);
  for (int a = 0; a < actions; ++a) {
    TinyAction act;
    for (int f : pick_distinct(rng, t.fluents, uniform(rng, 0, 2))) act.pre.emplace_back(f, uniform(rng, 0, 2) == 0);
    act.add = pick_distinct(rng, t.fluents, uniform(rng, 0, 2));
    act.del = pick_distinct(rng, t.fluents, uniform(rng, 0, 2));
    t.actions.push_back(act);
  }
  int clauses = uniform(rng, 1, 2);
  for (int c = 0; c < clauses; ++c) {
    std::vector<std::pair<int, bool>> clause;
    for (int f : pick_distinct(rng, t.fluents, uniform(rng, 1, 2))) clause.emplace_back(f, uniform(rng, 0, 3) == 0);
    t.goal.push_back(clause);
  }
  return t;
}

inline std::string fluent_name(int f) { return "(f" + std::to_string(f) + ")"; }
inline std::string action_name(int a) { return "(a" + std::to_string(a) + ")"; }

// Every action is marked applicable from layer 0.
inline GroundInstance to_ground(const TinyProblem& t, int k) {
  GroundInstance g;
  for (int f = 0; f < t.fluents; ++f) g.fluents.push_back(fluent_name(f));
  for (std::size_t a = 0; a < t.actions.size(); ++a) {
    GroundAction ga;
    ga.name = action_name(static_cast<int>(a));
    for (auto [f, neg] : t.actions[a].pre) ga.precondition.push_back({static_cast<FluentId>(f), neg});
    for (int f : t.actions[a].add) ga.add.push_back(static_cast<FluentId>(f));
    for (int f : t.actions[a].del) ga.del.push_back(static_cast<FluentId>(f));
    g.actions.push_back(ga);
  }
  for (int f : t.init_true) g.init_true.push_back(static_cast<FluentId>(f));
  for (int f : t.unknown) g.init_unknown.push_back(static_cast<FluentId>(f));
  for (const auto& clause : t.goal) {
    std::vector<FluentLiteral> c;
    for (auto [f, neg] : clause) c.push_back({static_cast<FluentId>(f), neg});
    g.goal.push_back(c);
  }
  g.grounded_upto = k;
  return g;
}

inline std::pair<std::string, std::string> to_pddl(const TinyProblem& t) {
  std::ostringstream d;
  d << "(define (domain tiny)\n  (:requirements :strips :negative-preconditions)\n  (:predicates";
  for (int f = 0; f < t.fluents; ++f) d << " " << fluent_name(f);
  d << ")\n";
  for (std::size_t a = 0; a < t.actions.size(); ++a) {
    const TinyAction& act = t.actions[a];
    d << "  (:action a" << a << "\n    :parameters ()\n    :precondition (and";
    for (auto [f, neg] : act.pre) d << " " << (neg ? "(not " + fluent_name(f) + ")" : fluent_name(f));
    d << ")\n    :effect (and";
    for (int f : act.add) d << " " << fluent_name(f);
    for (int f : act.del) d << " (not " << fluent_name(f) << ")";
    d << "))\n";
  }
  d << ")\n";
  std::ostringstream p;
  p << "(define (problem tiny-p)\n  (:domain tiny)\n  (:init";
  for (int f : t.init_true) p << " " << fluent_name(f);
  for (int f : t.unknown) p << " (unknown " << fluent_name(f) << ")";
  p << ")\n  (:goal (and";
  for (const auto& clause : t.goal) {
    p << " (or";
    for (auto [f, neg] : clause) p << " " << (neg ? "(not " + fluent_name(f) + ")" : fluent_name(f));
    p << ")";
  }
  p << ")))\n";
  return {d.str(), p.str()};
}

// --- belief-state search ----------------------------------------------------

// One world per completion of the unknowns; a belief is the vector of
// world states in completion order.
using World = std::vector<bool>;
using Belief = std::vector<World>;

inline Belief initial_belief(const GroundInstance& g) {
  std::size_t u = g.init_unknown.size();
  Belief b;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u); ++mask) {
    World w(g.fluents.size(), false);
    for (FluentId f : g.init_true) w[f] = true;
    for (std::size_t i = 0; i < u; ++i) w[g.init_unknown[i]] = (mask >> i) & 1u;
    b.push_back(w);
  }
  return b;
}

inline bool holds(const World& w, const std::vector<FluentLiteral>& lits) {
  for (const auto& l : lits) {
    if (w[l.fluent] == l.negated) return false;
  }
  return true;
}

inline bool goal_holds(const GroundInstance& g, const Belief& b) {
  for (const World& w : b) {
    for (const auto& clause : g.goal) {
      bool sat = false;
      for (const auto& l : clause) sat = sat || w[l.fluent] != l.negated;
      if (!sat) return false;
    }
  }
  return true;
}

// nullopt when some world violates the precondition.
inline std::optional<Belief> apply_action(const GroundAction& a, const Belief& b) {
  Belief next;
  next.reserve(b.size());
  for (World w : b) {
    if (!holds(w, a.precondition)) return std::nullopt;
    for (FluentId f : a.del) w[f] = false;
    for (FluentId f : a.add) w[f] = true;
    next.push_back(std::move(w));
  }
  return next;
}

// Runs a named plan over every completion.
inline bool plan_succeeds(const GroundInstance& g, const Plan& plan) {
  Belief b = initial_belief(g);
  for (const auto& step : plan.steps) {
    if (step == kNoop) continue;
    const GroundAction* act = nullptr;
    for (const auto& a : g.actions) {
      if (a.name == step) act = &a;
    }
    if (!act) return false;
    auto next = apply_action(*act, b);
    if (!next) return false;
    b = std::move(*next);
  }
  return goal_holds(g, b);
}

struct SearchResult {
  std::optional<int> min_length;  // shortest plan length within the bound
  bool exhausted = true;          // false when the node cap was hit
};

// Breadth-first search over beliefs. Noop makes every shorter plan extend
// to any longer length, so "a k-plan exists" iff min_length <= k.
inline SearchResult shortest_plan(const GroundInstance& g, int max_k, std::size_t node_cap = 200000) {
  SearchResult r;
  std::set<Belief> seen;
  std::vector<Belief> frontier{initial_belief(g)};
  seen.insert(frontier.front());
  for (int depth = 0; depth <= max_k; ++depth) {
    for (const Belief& b : frontier) {
      if (goal_holds(g, b)) {
        r.min_length = depth;
        return r;
      }
    }
    if (depth == max_k) break;
    std::vector<Belief> next;
    for (const Belief& b : frontier) {
      for (const auto& a : g.actions) {
        auto succ = apply_action(a, b);
        if (!succ || !seen.insert(*succ).second) continue;
        if (seen.size() > node_cap) {
          r.exhausted = false;
          return r;
        }
        next.push_back(std::move(*succ));
      }
    }
    frontier = std::move(next);
  }
  return r;
}

}  // namespace qbfplan::testing
