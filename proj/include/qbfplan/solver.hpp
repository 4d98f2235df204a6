#pragma once

// Search-based QCDCL solver with clause and cube learning and a stack of
// clause frames for incremental use.
//
// Invariants maintained between calls:
//  - original clauses are stored universally reduced and tagged with the id
//    of the frame they were added to;
//  - a learned clause records the largest frame id among the original
//    clauses its derivation used, and is discarded when that frame is popped;
//  - learned cubes survive pop but are discarded on any clause addition or
//    prefix growth;
//  - every solve() starts from an empty trail.

#include <chrono>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "qbfplan/formula.hpp"
#include "qbfplan/oracle.hpp"

namespace qbfplan {

struct SolverStats {
  std::uint64_t assignments = 0;  // trail pushes, propagations included
  std::uint64_t backtracks = 0;   // backjumps after learning
  std::uint64_t conflicts = 0;
  std::uint64_t solutions = 0;
  std::uint64_t learned_clauses = 0;
  std::uint64_t learned_cubes = 0;
  std::uint64_t solve_calls = 0;
  std::uint64_t restarts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t fallback_learns = 0;  // decision-based constraints

  SolverStats operator-(const SolverStats& earlier) const;
};

enum class SolveStatus { Sat, Unsat, Unknown };

enum class Interrupt { None, Timeout, Memout };

struct SolveOutcome {
  SolveStatus status = SolveStatus::Unknown;
  Interrupt interrupt = Interrupt::None;
  // Present iff status is Sat and the level-1 block is existential.
  std::optional<Assignment> outer_assignment;
  SolverStats stats_delta;
};

struct SolverLimits {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  // Soft cap on stored literals (original + learned); 0 disables.
  std::size_t max_literals = 0;
};

struct SolverOptions {
  std::uint64_t restart_first = 256;
  double restart_factor = 1.5;
  double activity_decay = 0.95;
  std::size_t gc_ratio = 4;
  std::size_t gc_min_learned = 64;
  // Nonzero seeds perturb the initial variable activities.
  std::uint64_t seed = 0;
};

enum class ConstraintKind : std::uint8_t { Clause, Cube };

struct LearnedConstraint {
  ConstraintKind kind = ConstraintKind::Clause;
  std::vector<Literal> literals;
  int frame_dependency = 0;  // clauses only
  double activity = 0.0;
};

class Solver {
 public:
  explicit Solver(SolverOptions options = {});

  int add_block(Quantifier q, std::span<const Var> variables);
  int add_block(Quantifier q, std::initializer_list<Var> variables) {
    return add_block(q, std::span<const Var>(variables.begin(), variables.size()));
  }
  void add_variable_to_block(int level, Var v);

  int push();
  void pop();
  int top_frame() const { return frames_.back().id; }
  std::vector<int> frame_ids() const;

  void add_clause(std::span<const Literal> literals);
  void add_clause(std::initializer_list<long> dimacs);

  // Copies prefix and frames of a formula into a fresh solver.
  void load(const QbfFormula& formula);

  SolveOutcome solve(const SolverLimits& limits = {});

  SolverStats stats() const { return stats_; }
  const Prefix& prefix() const { return prefix_; }

  // Live original clauses, frame structure preserved, as they were added.
  QbfFormula snapshot() const;
  std::vector<LearnedConstraint> learned() const;
  std::size_t live_learned_clauses() const;
  std::size_t live_learned_cubes() const;
  std::size_t tautologies_dropped() const { return tautologies_dropped_; }

 private:
  using CRef = std::uint32_t;
  static constexpr CRef kNoReason = ~CRef{0};

  struct Constraint {
    std::vector<Literal> lits;
    ConstraintKind kind = ConstraintKind::Clause;
    bool learned = false;
    bool deleted = false;
    int frame = 0;  // original: owning frame; learned clause: dependency
    double activity = 0.0;
    std::uint32_t true_count = 0;   // originals only
    std::uint32_t false_count = 0;  // cubes only
  };

  struct FrameRecord {
    int id = 0;
    std::vector<CRef> originals;
    std::vector<Clause> as_added;
  };

  enum class EventKind { None, Conflict, Solution };
  struct Event {
    EventKind kind = EventKind::None;
    CRef constraint = kNoReason;  // kNoReason for a matrix-satisfied solution
  };

  // Result of analysing a conflict or solution.
  struct Learned {
    bool final = false;  // empty clause or empty cube derived
    std::vector<Literal> lits;
    Literal asserted;
    int backjump_level = 0;
    int frame_dependency = 0;
    std::optional<Assignment> witness;  // set for a final empty cube
  };

  // variable bookkeeping
  void ensure_var(Var v);
  void reset_search();
  void invalidate_cubes();

  int value(Literal l) const;
  int decision_level() const { return static_cast<int>(level_start_.size()); }
  void assign(Literal l, CRef reason);
  void unassign_to(std::size_t keep);
  void backtrack(int level);
  void new_decision_level() { level_start_.push_back(trail_.size()); }

  // propagation
  enum class Status { None, Conflict, Unit, Satisfied };
  Status eval_clause(const Constraint& c, Literal& unit) const;
  Status eval_cube(const Constraint& c, Literal& unit) const;
  Event propagate();
  Event initial_scan();

  // learning
  Learned analyze_conflict(CRef conflict);
  Learned analyze_solution(CRef cube);
  Learned fallback_clause();
  Learned fallback_cube();
  std::optional<Learned> asserting_clause(const std::vector<Literal>& lits, int dependency) const;
  std::optional<Learned> asserting_cube(const std::vector<Literal>& lits) const;
  std::vector<Literal> cover_cube();
  Assignment witness_from(const std::vector<Literal>& cube_lits) const;
  CRef store_learned(Learned& learned, ConstraintKind kind);
  void attach(CRef ref);
  void rebuild_occurrences();
  void bump_var(Var v);
  void bump_constraint(Constraint& c);
  void decay_activities();
  void collect_garbage();

  // search
  bool decide();
  bool over_budget(const SolverLimits& limits, Interrupt& why);
  std::size_t stored_literals() const;

  SolverOptions options_;
  Prefix prefix_;
  std::vector<Constraint> db_;
  std::vector<FrameRecord> frames_;
  std::vector<std::vector<CRef>> clause_occ_;  // by literal code
  std::vector<std::vector<CRef>> cube_occ_;

  std::vector<std::int8_t> value_;  // -1 unassigned
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<std::size_t> trail_pos_;
  std::vector<std::int8_t> phase_;
  std::vector<double> activity_;
  std::vector<Literal> trail_;
  std::vector<std::size_t> level_start_;
  std::size_t clause_head_ = 0;
  std::size_t cube_head_ = 0;

  std::size_t live_originals_ = 0;
  std::size_t satisfied_originals_ = 0;
  std::size_t live_learned_clause_count_ = 0;
  std::size_t live_learned_cube_count_ = 0;
  std::size_t tautologies_dropped_ = 0;

  double var_inc_ = 1.0;
  double constraint_inc_ = 1.0;
  std::uint64_t next_restart_ = 0;
  double restart_interval_ = 0.0;

  SolverStats stats_;
};

}  // namespace qbfplan
