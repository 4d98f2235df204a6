#include "qbfplan/oracle.hpp"

#include <string>
#include <vector>

namespace qbfplan {

namespace {

// Expansion state: value per variable (-1 unassigned) and the variables in
// prefix order.
class Expander {
 public:
  Expander(const QbfFormula& formula, const OracleOptions& options)
      : prefix_(formula.prefix()), clauses_(formula.clauses()) {
    if (prefix_.variable_count() > options.variable_cap) {
      throw FormulaError("oracle variable cap exceeded: " +
                         std::to_string(prefix_.variable_count()) + " > " +
                         std::to_string(options.variable_cap));
    }
    for (const auto& clause : clauses_) {
      for (auto l : clause) {
        if (!prefix_.declared(l.var())) {
          throw FormulaError("oracle: clause variable " + std::to_string(l.var()) +
                             " is not quantified");
        }
      }
    }
    values_.assign(static_cast<std::size_t>(prefix_.max_var()) + 1, -1);
    for (const auto& block : prefix_.blocks()) {
      order_.insert(order_.end(), block.variables.begin(), block.variables.end());
    }
  }

  void assign(Var v, bool value) { values_[v] = value ? 1 : 0; }

  bool solve() { return expand(0); }

 private:
  enum class Outcome { True, False, Open };

  int value_of(Literal l) const {
    int v = values_[l.var()];
    if (v < 0) return -1;
    return l.is_negative() ? 1 - v : v;
  }

  // Simplifies under the current values. Existential unit literals are
  // forced (recorded in `forced`); a clause left with only universal
  // literals, or none, is false.
  Outcome simplify(std::vector<Var>& forced) {
    bool changed = true;
    while (changed) {
      changed = false;
      bool all_satisfied = true;
      for (const auto& clause : clauses_) {
        bool satisfied = false;
        int open_exists = 0;
        Literal unit;
        for (auto l : clause) {
          int val = value_of(l);
          if (val == 1) {
            satisfied = true;
            break;
          }
          if (val < 0 && prefix_.is_existential(l.var())) {
            ++open_exists;
            unit = l;
          }
        }
        if (satisfied) continue;
        all_satisfied = false;
        if (open_exists == 0) return Outcome::False;
        if (open_exists == 1 && only_literal_open(clause, unit)) {
          assign(unit.var(), unit.is_positive());
          forced.push_back(unit.var());
          changed = true;
        }
      }
      if (all_satisfied) return Outcome::True;
    }
    return Outcome::Open;
  }

  bool only_literal_open(const Clause& clause, Literal unit) const {
    for (auto l : clause) {
      if (l != unit && value_of(l) < 0) return false;
    }
    return true;
  }

  bool expand(std::size_t index) {
    std::vector<Var> forced;
    Outcome outcome = simplify(forced);
    bool result = false;
    if (outcome != Outcome::Open) {
      result = outcome == Outcome::True;
    } else {
      while (index < order_.size() && values_[order_[index]] >= 0) ++index;
      // Open implies some clause still has an unassigned existential.
      Var v = order_[index];
      bool exists = prefix_.is_existential(v);
      result = !exists;
      for (int value = 0; value <= 1; ++value) {
        assign(v, value == 1);
        bool sub = expand(index + 1);
        values_[v] = -1;
        if (exists && sub) {
          result = true;
          break;
        }
        if (!exists && !sub) {
          result = false;
          break;
        }
      }
    }
    for (Var f : forced) values_[f] = -1;
    return result;
  }

  const Prefix& prefix_;
  std::vector<Clause> clauses_;
  std::vector<int> values_;
  std::vector<Var> order_;
};

void check_prefix_closed(const Prefix& prefix, const Assignment& assignment) {
  std::size_t remaining = assignment.size();
  for (const auto& block : prefix.blocks()) {
    if (remaining == 0) break;
    std::size_t hits = 0;
    for (Var v : block.variables) hits += assignment.count(v);
    remaining -= hits;
    if (hits < block.variables.size()) {
      if (remaining != 0) {
        throw FormulaError("assignment is not prefix-closed: block " +
                           std::to_string(block.level) +
                           " is partially assigned while inner variables are assigned");
      }
      break;
    }
  }
  for (const auto& [v, value] : assignment) {
    if (!prefix.declared(v)) {
      throw FormulaError("assignment mentions undeclared variable " + std::to_string(v));
    }
  }
}

}  // namespace

QbfStatus evaluate_under(const QbfFormula& formula, const Assignment& assignment,
                         const OracleOptions& options) {
  check_prefix_closed(formula.prefix(), assignment);
  Expander expander(formula, options);
  for (const auto& [v, value] : assignment) expander.assign(v, value);
  return expander.solve() ? QbfStatus::Sat : QbfStatus::Unsat;
}

OracleResult evaluate(const QbfFormula& formula, const OracleOptions& options) {
  OracleResult result;
  result.status = Expander(formula, options).solve() ? QbfStatus::Sat : QbfStatus::Unsat;
  const auto& blocks = formula.prefix().blocks();
  if (result.status == QbfStatus::Sat && !blocks.empty() &&
      blocks.front().quantifier == Quantifier::Exists) {
    // Fix the outer block one variable at a time, false first.
    Assignment witness;
    for (Var v : blocks.front().variables) {
      witness[v] = false;
      if (evaluate_under(formula, witness, options) == QbfStatus::Unsat) witness[v] = true;
    }
    result.outer_witness = std::move(witness);
  }
  return result;
}

}  // namespace qbfplan
