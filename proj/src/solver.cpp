#include "qbfplan/solver.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qbfplan {

SolverStats SolverStats::operator-(const SolverStats& earlier) const {
  SolverStats d;
  d.assignments = assignments - earlier.assignments;
  d.backtracks = backtracks - earlier.backtracks;
  d.conflicts = conflicts - earlier.conflicts;
  d.solutions = solutions - earlier.solutions;
  d.learned_clauses = learned_clauses - earlier.learned_clauses;
  d.learned_cubes = learned_cubes - earlier.learned_cubes;
  d.solve_calls = solve_calls - earlier.solve_calls;
  d.restarts = restarts - earlier.restarts;
  d.decisions = decisions - earlier.decisions;
  d.fallback_learns = fallback_learns - earlier.fallback_learns;
  return d;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Solver::Solver(SolverOptions options) : options_(options) {
  frames_.push_back(FrameRecord{0, {}, {}});
  restart_interval_ = static_cast<double>(options_.restart_first);
  next_restart_ = options_.restart_first;
  ensure_var(0);
}

// --- prefix and frames ------------------------------------------------------

void Solver::ensure_var(Var v) {
  std::size_t n = static_cast<std::size_t>(v) + 1;
  if (value_.size() >= n) return;
  std::size_t old = value_.size();
  value_.resize(n, -1);
  level_.resize(n, 0);
  reason_.resize(n, kNoReason);
  trail_pos_.resize(n, 0);
  phase_.resize(n, 0);
  activity_.resize(n, 0.0);
  clause_occ_.resize(2 * n);
  cube_occ_.resize(2 * n);
  if (options_.seed != 0) {
    for (std::size_t i = old; i < n; ++i) {
      activity_[i] = static_cast<double>(splitmix64(options_.seed ^ (i * 0x9e37ULL)) % 1000) * 1e-6;
    }
  }
}

int Solver::add_block(Quantifier q, std::span<const Var> variables) {
  reset_search();
  int level = prefix_.add_block(q, variables);
  for (Var v : variables) ensure_var(v);
  invalidate_cubes();
  return level;
}

void Solver::add_variable_to_block(int level, Var v) {
  reset_search();
  prefix_.add_variable(level, v);
  ensure_var(v);
  invalidate_cubes();
}

int Solver::push() {
  reset_search();
  int id = top_frame() + 1;
  frames_.push_back(FrameRecord{id, {}, {}});
  return id;
}

void Solver::pop() {
  if (frames_.size() == 1) throw FormulaError("frame 0 cannot be popped");
  reset_search();
  const FrameRecord& top = frames_.back();
  for (CRef ref : top.originals) {
    Constraint& c = db_[ref];
    c.deleted = true;
    c.lits.clear();
    c.lits.shrink_to_fit();
    --live_originals_;
  }
  for (auto& c : db_) {
    if (c.deleted || !c.learned || c.kind != ConstraintKind::Clause) continue;
    if (c.frame >= top.id) {
      c.deleted = true;
      c.lits.clear();
      --live_learned_clause_count_;
    }
  }
  frames_.pop_back();
  rebuild_occurrences();
}

std::vector<int> Solver::frame_ids() const {
  std::vector<int> ids;
  for (const auto& f : frames_) ids.push_back(f.id);
  return ids;
}

void Solver::add_clause(std::span<const Literal> literals) {
  for (auto l : literals) {
    if (!prefix_.declared(l.var())) {
      throw FormulaError("clause uses undeclared variable " + std::to_string(l.var()));
    }
  }
  auto clause = Clause::make(literals);
  if (!clause) {
    ++tautologies_dropped_;
    return;
  }
  reset_search();
  invalidate_cubes();
  Clause reduced = universal_reduce(*clause, prefix_);
  Constraint c;
  c.lits = reduced.literals();
  c.kind = ConstraintKind::Clause;
  c.frame = top_frame();
  db_.push_back(std::move(c));
  CRef ref = static_cast<CRef>(db_.size() - 1);
  attach(ref);
  ++live_originals_;
  frames_.back().originals.push_back(ref);
  frames_.back().as_added.push_back(std::move(*clause));
}

void Solver::add_clause(std::initializer_list<long> dimacs) {
  std::vector<Literal> lits;
  for (long d : dimacs) lits.push_back(Literal::from_dimacs(d));
  add_clause(lits);
}

void Solver::load(const QbfFormula& formula) {
  for (const auto& block : formula.prefix().blocks()) add_block(block.quantifier, block.variables);
  bool first = true;
  for (const auto& frame : formula.frames()) {
    if (!first) push();
    first = false;
    for (const auto& clause : frame.clauses) add_clause(clause.literals());
  }
}

QbfFormula Solver::snapshot() const {
  QbfFormula f;
  for (const auto& block : prefix_.blocks()) f.add_block(block.quantifier, block.variables);
  bool first = true;
  for (const auto& frame : frames_) {
    if (!first) f.push();
    first = false;
    for (const auto& clause : frame.as_added) f.add_clause(clause.literals());
  }
  return f;
}

std::vector<LearnedConstraint> Solver::learned() const {
  std::vector<LearnedConstraint> out;
  for (const auto& c : db_) {
    if (c.deleted || !c.learned) continue;
    out.push_back(LearnedConstraint{c.kind, c.lits, c.kind == ConstraintKind::Clause ? c.frame : 0,
                                    c.activity});
  }
  return out;
}

std::size_t Solver::live_learned_clauses() const { return live_learned_clause_count_; }
std::size_t Solver::live_learned_cubes() const { return live_learned_cube_count_; }

void Solver::invalidate_cubes() {
  if (live_learned_cube_count_ == 0) return;
  for (auto& c : db_) {
    if (!c.deleted && c.kind == ConstraintKind::Cube) {
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
    }
  }
  for (auto& occ : cube_occ_) occ.clear();
  live_learned_cube_count_ = 0;
}

void Solver::attach(CRef ref) {
  const Constraint& c = db_[ref];
  auto& occ = c.kind == ConstraintKind::Clause ? clause_occ_ : cube_occ_;
  for (auto l : c.lits) occ[l.code()].push_back(ref);
  if (c.kind == ConstraintKind::Cube) {
    std::uint32_t n = 0;
    for (auto l : c.lits) n += value(l) == 0;
    db_[ref].false_count = n;
  }
}

void Solver::rebuild_occurrences() {
  for (auto& occ : clause_occ_) occ.clear();
  for (auto& occ : cube_occ_) occ.clear();
  for (CRef ref = 0; ref < db_.size(); ++ref) {
    if (!db_[ref].deleted) attach(ref);
  }
}

std::size_t Solver::stored_literals() const {
  std::size_t n = 0;
  for (const auto& c : db_) n += c.lits.size();
  return n;
}

// --- assignment -------------------------------------------------------------

int Solver::value(Literal l) const {
  int v = value_[l.var()];
  if (v < 0) return -1;
  return l.is_negative() ? 1 - v : v;
}

void Solver::assign(Literal l, CRef reason) {
  Var v = l.var();
  value_[v] = l.is_positive() ? 1 : 0;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_pos_[v] = trail_.size();
  trail_.push_back(l);
  ++stats_.assignments;
  for (CRef ref : clause_occ_[l.code()]) {
    Constraint& c = db_[ref];
    if (c.learned || c.deleted) continue;
    if (c.true_count++ == 0) ++satisfied_originals_;
  }
  for (CRef ref : cube_occ_[(~l).code()]) ++db_[ref].false_count;
}

void Solver::unassign_to(std::size_t keep) {
  while (trail_.size() > keep) {
    Literal l = trail_.back();
    trail_.pop_back();
    Var v = l.var();
    phase_[v] = value_[v];
    value_[v] = -1;
    reason_[v] = kNoReason;
    for (CRef ref : clause_occ_[l.code()]) {
      Constraint& c = db_[ref];
      if (c.learned || c.deleted) continue;
      if (--c.true_count == 0) --satisfied_originals_;
    }
    for (CRef ref : cube_occ_[(~l).code()]) --db_[ref].false_count;
  }
}

void Solver::backtrack(int level) {
  if (level >= decision_level()) return;
  unassign_to(level_start_[static_cast<std::size_t>(level)]);
  level_start_.resize(static_cast<std::size_t>(level));
  clause_head_ = std::min(clause_head_, trail_.size());
  cube_head_ = std::min(cube_head_, trail_.size());
}

void Solver::reset_search() {
  // Level 0 entries are removed too: every solve recomputes them.
  unassign_to(0);
  level_start_.clear();
  clause_head_ = 0;
  cube_head_ = 0;
}

// --- propagation ------------------------------------------------------------

Solver::Status Solver::eval_clause(const Constraint& c, Literal& unit) const {
  int open_exists = 0;
  Literal e;
  for (auto l : c.lits) {
    int val = value(l);
    if (val == 1) return Status::None;
    if (val < 0 && prefix_.is_existential(l.var())) {
      if (++open_exists > 1) return Status::None;
      e = l;
    }
  }
  if (open_exists == 0) return Status::Conflict;
  int elevel = prefix_.level_of(e.var());
  for (auto l : c.lits) {
    if (value(l) < 0 && l != e && prefix_.level_of(l.var()) < elevel) return Status::None;
  }
  unit = e;
  return Status::Unit;
}

Solver::Status Solver::eval_cube(const Constraint& c, Literal& unit) const {
  int open_forall = 0;
  Literal u;
  for (auto l : c.lits) {
    int val = value(l);
    if (val == 0) return Status::None;
    if (val < 0 && prefix_.is_universal(l.var())) {
      if (++open_forall > 1) return Status::None;
      u = l;
    }
  }
  if (open_forall == 0) return Status::Satisfied;
  int ulevel = prefix_.level_of(u.var());
  for (auto l : c.lits) {
    if (value(l) < 0 && l != u && prefix_.level_of(l.var()) < ulevel) return Status::None;
  }
  unit = ~u;
  return Status::Unit;
}

Solver::Event Solver::initial_scan() {
  for (CRef ref = 0; ref < db_.size(); ++ref) {
    const Constraint& c = db_[ref];
    if (c.deleted) continue;
    Literal unit;
    if (c.kind == ConstraintKind::Clause) {
      Status s = eval_clause(c, unit);
      if (s == Status::Conflict) return Event{EventKind::Conflict, ref};
      if (s == Status::Unit) assign(unit, ref);
    } else {
      Status s = eval_cube(c, unit);
      if (s == Status::Satisfied) return Event{EventKind::Solution, ref};
      if (s == Status::Unit) assign(unit, ref);
    }
  }
  return Event{};
}

Solver::Event Solver::propagate() {
  for (;;) {
    while (clause_head_ < trail_.size()) {
      Literal falsified = ~trail_[clause_head_++];
      const auto& occ = clause_occ_[falsified.code()];
      for (std::size_t i = 0; i < occ.size(); ++i) {
        CRef ref = occ[i];
        const Constraint& c = db_[ref];
        if (c.deleted) continue;
        Literal unit;
        Status s = eval_clause(c, unit);
        if (s == Status::Conflict) return Event{EventKind::Conflict, ref};
        if (s == Status::Unit) assign(unit, ref);
      }
    }
    if (satisfied_originals_ == live_originals_) return Event{EventKind::Solution, kNoReason};
    bool progressed = false;
    while (!progressed && cube_head_ < trail_.size()) {
      Literal made_true = trail_[cube_head_++];
      const auto& occ = cube_occ_[made_true.code()];
      for (std::size_t i = 0; i < occ.size(); ++i) {
        CRef ref = occ[i];
        const Constraint& c = db_[ref];
        if (c.deleted || c.false_count > 0) continue;
        Literal unit;
        Status s = eval_cube(c, unit);
        if (s == Status::Satisfied) return Event{EventKind::Solution, ref};
        if (s == Status::Unit) {
          assign(unit, ref);
          progressed = true;
        }
      }
    }
    if (!progressed && clause_head_ == trail_.size()) return Event{};
  }
}

// --- learning ---------------------------------------------------------------

void Solver::bump_var(Var v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
}

void Solver::bump_constraint(Constraint& c) {
  if (!c.learned) return;
  c.activity += constraint_inc_;
  if (c.activity > 1e100) {
    for (auto& k : db_) k.activity *= 1e-100;
    constraint_inc_ *= 1e-100;
  }
}

void Solver::decay_activities() {
  var_inc_ /= options_.activity_decay;
  constraint_inc_ /= options_.activity_decay;
}

std::optional<Solver::Learned> Solver::asserting_clause(const std::vector<Literal>& lits,
                                                       int dependency) const {
  int d = -1;
  int count = 0;
  Literal e;
  for (auto l : lits) {
    if (!prefix_.is_existential(l.var())) continue;
    int lv = level_[l.var()];
    if (lv > d) {
      d = lv;
      count = 1;
      e = l;
    } else if (lv == d) {
      ++count;
    }
  }
  if (d <= 0 || count != 1) return std::nullopt;
  int elevel = prefix_.level_of(e.var());
  int backjump = 0;
  for (auto l : lits) {
    if (l == e) continue;
    Var v = l.var();
    if (prefix_.is_universal(v) && (value_[v] < 0 || level_[v] >= d)) {
      // Stays unassigned after the backjump: must be reducible under e.
      if (prefix_.level_of(v) < elevel) return std::nullopt;
      continue;
    }
    backjump = std::max(backjump, level_[v]);
  }
  Learned learned;
  learned.lits = lits;
  learned.asserted = e;
  learned.backjump_level = backjump;
  learned.frame_dependency = dependency;
  return learned;
}

std::optional<Solver::Learned> Solver::asserting_cube(const std::vector<Literal>& lits) const {
  int d = -1;
  int count = 0;
  Literal u;
  for (auto l : lits) {
    if (!prefix_.is_universal(l.var())) continue;
    int lv = level_[l.var()];
    if (lv > d) {
      d = lv;
      count = 1;
      u = l;
    } else if (lv == d) {
      ++count;
    }
  }
  if (d <= 0 || count != 1) return std::nullopt;
  int ulevel = prefix_.level_of(u.var());
  int backjump = 0;
  for (auto l : lits) {
    if (l == u) continue;
    Var v = l.var();
    if (prefix_.is_existential(v) && (value_[v] < 0 || level_[v] >= d)) {
      if (prefix_.level_of(v) < ulevel) return std::nullopt;
      continue;
    }
    backjump = std::max(backjump, level_[v]);
  }
  Learned learned;
  learned.lits = lits;
  learned.asserted = ~u;
  learned.backjump_level = backjump;
  return learned;
}

Solver::Learned Solver::fallback_clause() {
  ++stats_.fallback_learns;
  std::vector<Literal> lits;
  for (auto l : trail_) {
    Var v = l.var();
    if (prefix_.is_universal(v) || reason_[v] == kNoReason) lits.push_back(~l);
  }
  Clause reduced = universal_reduce(*Clause::make(lits), prefix_);
  bool any_exists = std::any_of(reduced.begin(), reduced.end(),
                                [&](Literal l) { return prefix_.is_existential(l.var()); });
  if (!any_exists) {
    Learned final_clause;
    final_clause.final = true;
    return final_clause;
  }
  auto learned = asserting_clause(reduced.literals(), top_frame());
  if (!learned) throw std::logic_error("decision clause is not asserting");
  return *learned;
}

Solver::Learned Solver::fallback_cube() {
  ++stats_.fallback_learns;
  std::vector<Literal> lits;
  for (auto l : trail_) {
    Var v = l.var();
    if (prefix_.is_existential(v) || reason_[v] == kNoReason) lits.push_back(l);
  }
  bool any_forall = std::any_of(lits.begin(), lits.end(),
                                [&](Literal l) { return prefix_.is_universal(l.var()); });
  if (!any_forall) {
    Learned final_cube;
    final_cube.final = true;
    final_cube.witness = witness_from(lits);
    return final_cube;
  }
  Cube reduced = existential_reduce(*Cube::make(lits), prefix_);
  auto learned = asserting_cube(reduced.literals());
  if (!learned) throw std::logic_error("decision cube is not asserting");
  return *learned;
}

Solver::Learned Solver::analyze_conflict(CRef conflict) {
  Constraint& start = db_[conflict];
  bump_constraint(start);
  Clause working = *Clause::make(start.lits);
  int dependency = start.frame;
  for (auto l : working) bump_var(l.var());

  for (;;) {
    working = universal_reduce(working, prefix_);
    bool any_exists = std::any_of(working.begin(), working.end(),
                                  [&](Literal l) { return prefix_.is_existential(l.var()); });
    if (!any_exists) {
      Learned final_clause;
      final_clause.final = true;
      final_clause.frame_dependency = dependency;
      return final_clause;
    }
    if (auto learned = asserting_clause(working.literals(), dependency)) return *learned;

    // Pivot: the latest clause-propagated existential on the deepest level.
    int d = -1;
    for (auto l : working) {
      if (prefix_.is_existential(l.var())) d = std::max(d, level_[l.var()]);
    }
    Var pivot = 0;
    for (auto l : working) {
      Var v = l.var();
      if (!prefix_.is_existential(v) || level_[v] != d || reason_[v] == kNoReason) continue;
      if (pivot == 0 || trail_pos_[v] > trail_pos_[pivot]) pivot = v;
    }
    if (pivot == 0) return fallback_clause();

    Constraint& antecedent = db_[reason_[pivot]];
    bump_constraint(antecedent);
    Clause reason = *Clause::make(antecedent.lits);
    bool pivot_true = value_[pivot] == 1;
    auto resolvent = pivot_true ? q_resolve(reason, working, pivot, prefix_)
                                : q_resolve(working, reason, pivot, prefix_);
    if (!resolvent) return fallback_clause();
    dependency = std::max(dependency, antecedent.frame);
    working = std::move(*resolvent);
    for (auto l : reason) bump_var(l.var());
  }
}

std::vector<Literal> Solver::cover_cube() {
  // One true literal per live original clause; reuse literals already picked.
  std::vector<std::int8_t> picked(clause_occ_.size(), 0);
  std::vector<Literal> cube;
  for (const auto& frame : frames_) {
    for (CRef ref : frame.originals) {
      const Constraint& c = db_[ref];
      bool covered = false;
      Literal exists_choice;
      Literal forall_choice;
      bool have_exists = false;
      bool have_forall = false;
      for (auto l : c.lits) {
        if (value(l) != 1) continue;
        if (picked[l.code()]) {
          covered = true;
          break;
        }
        if (prefix_.is_existential(l.var())) {
          if (!have_exists) exists_choice = l;
          have_exists = true;
        } else if (!have_forall) {
          forall_choice = l;
          have_forall = true;
        }
      }
      if (covered) continue;
      if (!have_exists && !have_forall) throw std::logic_error("cover requested for unsatisfied matrix");
      Literal choice = have_exists ? exists_choice : forall_choice;
      picked[choice.code()] = 1;
      cube.push_back(choice);
    }
  }
  return cube;
}

Assignment Solver::witness_from(const std::vector<Literal>& cube_lits) const {
  Assignment witness;
  if (prefix_.block_count() == 0 || prefix_.block(1).quantifier != Quantifier::Exists) {
    return witness;
  }
  for (Var v : prefix_.block(1).variables) witness[v] = value_[v] == 1;
  for (auto l : cube_lits) {
    if (prefix_.level_of(l.var()) == 1) witness[l.var()] = l.is_positive();
  }
  return witness;
}

Solver::Learned Solver::analyze_solution(CRef cube) {
  std::vector<Literal> start;
  if (cube == kNoReason) {
    start = cover_cube();
  } else {
    bump_constraint(db_[cube]);
    start = db_[cube].lits;
  }
  Cube working = *Cube::make(start);
  for (auto l : working) bump_var(l.var());

  for (;;) {
    bool any_forall = std::any_of(working.begin(), working.end(),
                                  [&](Literal l) { return prefix_.is_universal(l.var()); });
    if (!any_forall) {
      Learned final_cube;
      final_cube.final = true;
      final_cube.witness = witness_from(working.literals());
      return final_cube;
    }
    working = existential_reduce(working, prefix_);
    if (auto learned = asserting_cube(working.literals())) return *learned;

    int d = -1;
    for (auto l : working) {
      if (prefix_.is_universal(l.var())) d = std::max(d, level_[l.var()]);
    }
    Var pivot = 0;
    for (auto l : working) {
      Var v = l.var();
      if (!prefix_.is_universal(v) || level_[v] != d || reason_[v] == kNoReason) continue;
      if (pivot == 0 || trail_pos_[v] > trail_pos_[pivot]) pivot = v;
    }
    if (pivot == 0) return fallback_cube();

    Constraint& antecedent = db_[reason_[pivot]];
    bump_constraint(antecedent);
    Cube reason = *Cube::make(antecedent.lits);
    // The working cube holds the trail literal of the pivot.
    bool pivot_true = value_[pivot] == 1;
    auto resolvent = pivot_true ? q_resolve(working, reason, pivot, prefix_)
                                : q_resolve(reason, working, pivot, prefix_);
    if (!resolvent) return fallback_cube();
    working = std::move(*resolvent);
    for (auto l : reason) bump_var(l.var());
  }
}

Solver::CRef Solver::store_learned(Learned& learned, ConstraintKind kind) {
  Constraint c;
  c.lits = std::move(learned.lits);
  c.kind = kind;
  c.learned = true;
  c.frame = kind == ConstraintKind::Clause ? learned.frame_dependency : 0;
  c.activity = constraint_inc_;
  db_.push_back(std::move(c));
  CRef ref = static_cast<CRef>(db_.size() - 1);
  attach(ref);
  if (kind == ConstraintKind::Clause) {
    ++live_learned_clause_count_;
    ++stats_.learned_clauses;
  } else {
    ++live_learned_cube_count_;
    ++stats_.learned_cubes;
  }
  return ref;
}

void Solver::collect_garbage() {
  std::size_t limit = std::max(options_.gc_min_learned, options_.gc_ratio * live_originals_);
  bool clauses_over = live_learned_clause_count_ > limit;
  bool cubes_over = live_learned_cube_count_ > limit;
  if (!clauses_over && !cubes_over) return;

  std::vector<std::int8_t> pinned(db_.size(), 0);
  for (auto l : trail_) {
    CRef r = reason_[l.var()];
    if (r != kNoReason) pinned[r] = 1;
  }
  auto shrink = [&](ConstraintKind kind, std::size_t& live) {
    std::vector<CRef> candidates;
    for (CRef ref = 0; ref < db_.size(); ++ref) {
      const Constraint& c = db_[ref];
      if (!c.deleted && c.learned && c.kind == kind && !pinned[ref]) candidates.push_back(ref);
    }
    std::sort(candidates.begin(), candidates.end(), [&](CRef a, CRef b) {
      return db_[a].activity < db_[b].activity || (db_[a].activity == db_[b].activity && a < b);
    });
    std::size_t drop = candidates.size() / 2;
    for (std::size_t i = 0; i < drop; ++i) {
      Constraint& c = db_[candidates[i]];
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
      --live;
    }
  };
  if (clauses_over) shrink(ConstraintKind::Clause, live_learned_clause_count_);
  if (cubes_over) shrink(ConstraintKind::Cube, live_learned_cube_count_);
  rebuild_occurrences();
}

// --- search -----------------------------------------------------------------

bool Solver::decide() {
  for (const auto& block : prefix_.blocks()) {
    Var best = 0;
    for (Var v : block.variables) {
      if (value_[v] >= 0) continue;
      if (best == 0 || activity_[v] > activity_[best] ||
          (activity_[v] == activity_[best] && v < best)) {
        best = v;
      }
    }
    if (best != 0) {
      new_decision_level();
      ++stats_.decisions;
      assign(Literal(best, phase_[best] != 1), kNoReason);
      return true;
    }
  }
  return false;
}

bool Solver::over_budget(const SolverLimits& limits, Interrupt& why) {
  if (limits.deadline && std::chrono::steady_clock::now() >= *limits.deadline) {
    why = Interrupt::Timeout;
    return true;
  }
  if (limits.max_literals != 0 && stored_literals() > limits.max_literals) {
    why = Interrupt::Memout;
    return true;
  }
  return false;
}

SolveOutcome Solver::solve(const SolverLimits& limits) {
  SolverStats before = stats_;
  ++stats_.solve_calls;
  reset_search();

  SolveOutcome outcome;
  if (over_budget(limits, outcome.interrupt)) {
    outcome.status = SolveStatus::Unknown;
    outcome.stats_delta = stats_ - before;
    return outcome;
  }
  Event event = initial_scan();
  if (event.kind == EventKind::None) event = propagate();
  std::uint64_t steps = 0;

  for (;;) {
    if (event.kind != EventKind::None) {
      bool conflict = event.kind == EventKind::Conflict;
      if (conflict) {
        ++stats_.conflicts;
      } else {
        ++stats_.solutions;
      }
      Learned learned = conflict ? analyze_conflict(event.constraint)
                                 : analyze_solution(event.constraint);
      decay_activities();
      if (learned.final) {
        outcome.status = conflict ? SolveStatus::Unsat : SolveStatus::Sat;
        if (!conflict && prefix_.block_count() > 0 &&
            prefix_.block(1).quantifier == Quantifier::Exists) {
          outcome.outer_assignment = std::move(learned.witness);
        }
        break;
      }
      backtrack(learned.backjump_level);
      ++stats_.backtracks;
      Literal asserted = learned.asserted;
      CRef ref = store_learned(learned, conflict ? ConstraintKind::Clause : ConstraintKind::Cube);
      assign(asserted, ref);
      event = propagate();
      continue;
    }

    if ((steps++ & 63) == 0 && over_budget(limits, outcome.interrupt)) {
      outcome.status = SolveStatus::Unknown;
      break;
    }
    collect_garbage();
    std::uint64_t events = stats_.conflicts + stats_.solutions;
    if (events >= next_restart_) {
      restart_interval_ *= options_.restart_factor;
      next_restart_ = events + static_cast<std::uint64_t>(restart_interval_);
      if (decision_level() > 0) {
        ++stats_.restarts;
        backtrack(0);
      }
    }
    if (!decide()) throw std::logic_error("complete assignment without conflict or solution");
    event = propagate();
  }
  outcome.stats_delta = stats_ - before;
  return outcome;
}

}  // namespace qbfplan
