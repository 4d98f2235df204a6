#pragma once

// ∃∀∃ encoding of bounded conformant planning.
//
//   block 1 (∃): a_t for every action usable at step t < k, noop included
//   block 2 (∀): one variable per unknown fluent
//   block 3 (∃): s_f,t for every fluent and t ≤ k
//
// Frame f0 (never popped) holds the initial state, the links between the
// universal variables and their time-0 state variables, and the transition
// clauses of every step. Frame f1 holds the goal at time k and is replaced
// on every extension.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbfplan/formula.hpp"
#include "qbfplan/oracle.hpp"
#include "qbfplan/planning.hpp"
#include "qbfplan/solver.hpp"

namespace qbfplan {

// Receiver of the encoding. Implemented for Solver (incremental use) and
// QbfFormula (monolithic use and QDIMACS dumps).
class EncodingTarget {
 public:
  virtual ~EncodingTarget() = default;
  virtual int add_block(Quantifier q, std::span<const Var> variables) = 0;
  virtual void add_variable_to_block(int level, Var v) = 0;
  virtual int push() = 0;
  virtual void pop() = 0;
  virtual void add_clause(std::span<const Literal> literals) = 0;
};

class SolverTarget : public EncodingTarget {
 public:
  explicit SolverTarget(Solver& solver) : solver_(solver) {}
  int add_block(Quantifier q, std::span<const Var> vs) override { return solver_.add_block(q, vs); }
  void add_variable_to_block(int level, Var v) override { solver_.add_variable_to_block(level, v); }
  int push() override { return solver_.push(); }
  void pop() override { solver_.pop(); }
  void add_clause(std::span<const Literal> lits) override { solver_.add_clause(lits); }

 private:
  Solver& solver_;
};

class FormulaTarget : public EncodingTarget {
 public:
  explicit FormulaTarget(QbfFormula& formula) : formula_(formula) {}
  int add_block(Quantifier q, std::span<const Var> vs) override { return formula_.add_block(q, vs); }
  void add_variable_to_block(int level, Var v) override { formula_.add_variable_to_block(level, v); }
  int push() override { return formula_.push(); }
  void pop() override { formula_.pop(); }
  void add_clause(std::span<const Literal> lits) override { formula_.add_clause(lits); }

 private:
  QbfFormula& formula_;
};

inline constexpr ActionId kNoopAction = ~ActionId{0};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EncodingMap {
  int k = 0;
  int f0 = 0;
  std::optional<int> f1;
  // step t -> (action id or kNoopAction, variable)
  std::vector<std::vector<std::pair<ActionId, Var>>> action_vars;
  std::map<FluentId, Var> unknown_vars;
  // fluent -> time -> variable
  std::vector<std::vector<Var>> state_vars;
  Var max_var = 0;

  Var action_var(ActionId a, int t) const;
  Var state_var(FluentId f, int t) const { return state_vars.at(f).at(static_cast<std::size_t>(t)); }
  Var unknown_var(FluentId f) const { return unknown_vars.at(f); }
};

class Encoder {
 public:
  Encoder(EncodingTarget& target, const GroundInstance& ground);

  // Builds QBF_k0. The ground instance must cover k0.
  void encode_initial(int k0);
  // Moves from QBF_k to QBF_k+1. `ground` must be the same instance,
  // extended (ids stable) to cover k + 1.
  void extend_to(const GroundInstance& ground, int k_next);

  const EncodingMap& map() const { return map_; }
  Plan decode_plan(const Assignment& outer) const;
  // "a:(pick i p)@0", "u:(holds d)", "s:(holds d)@2"
  std::string variable_name(Var v) const;

 private:
  Var fresh(std::string name);
  void add(std::vector<Literal> clause);
  void add_initial(FluentId f);
  void add_frame_axioms(FluentId f, int t);
  void add_step(int t);
  void add_goal();
  std::vector<ActionId> actions_at(int t) const;
  void allocate_step_actions(int t, std::vector<Var>& out);
  void allocate_states(FluentId f, int from, int to, std::vector<Var>& out);

  EncodingTarget& target_;
  const GroundInstance* ground_;
  EncodingMap map_;
  std::size_t encoded_fluents_ = 0;
  bool initialised_ = false;
  std::vector<std::string> names_;  // by variable id
};

}  // namespace qbfplan
