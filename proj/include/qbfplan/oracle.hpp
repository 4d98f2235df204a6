#pragma once

// Brute-force QBF evaluation by recursive expansion over the prefix. This is
// the ground truth used to check the solver and the planning encoder, so it
// stays deliberately naive: no learning, no memoization.

#include <cstddef>
#include <map>
#include <optional>

#include "qbfplan/formula.hpp"

namespace qbfplan {

enum class QbfStatus { Sat, Unsat };

using Assignment = std::map<Var, bool>;

struct OracleResult {
  QbfStatus status = QbfStatus::Unsat;
  // Present iff sat and the level-1 block is existential.
  std::optional<Assignment> outer_witness;
};

struct OracleOptions {
  std::size_t variable_cap = 30;
};

OracleResult evaluate(const QbfFormula& formula, const OracleOptions& options = {});

// Evaluates the formula after substituting `assignment`. The assigned
// variables must be the union of the first j blocks and a subset of block
// j + 1 (empty blocks are skipped).
QbfStatus evaluate_under(const QbfFormula& formula, const Assignment& assignment,
                         const OracleOptions& options = {});

}  // namespace qbfplan
