#include "qbfplan/formula.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace qbfplan {

Literal Literal::from_dimacs(long value) {
  if (value == 0 || value == std::numeric_limits<long>::min()) {
    throw FormulaError("literal 0 is not a valid literal");
  }
  auto var = static_cast<Var>(value < 0 ? -value : value);
  return Literal(var, value < 0);
}

std::string to_string(const Literal& l) { return std::to_string(l.to_dimacs()); }

template <class Tag>
std::optional<LiteralSet<Tag>> LiteralSet<Tag>::make(std::span<const Literal> literals) {
  LiteralSet set;
  set.literals_.assign(literals.begin(), literals.end());
  std::sort(set.literals_.begin(), set.literals_.end());
  set.literals_.erase(std::unique(set.literals_.begin(), set.literals_.end()),
                      set.literals_.end());
  // Complementary literals are adjacent after sorting.
  for (std::size_t i = 1; i < set.literals_.size(); ++i) {
    if (set.literals_[i].var() == set.literals_[i - 1].var()) return std::nullopt;
  }
  return set;
}

template <class Tag>
std::optional<LiteralSet<Tag>> LiteralSet<Tag>::make(std::initializer_list<long> dimacs) {
  std::vector<Literal> lits;
  lits.reserve(dimacs.size());
  for (long d : dimacs) lits.push_back(Literal::from_dimacs(d));
  return make(lits);
}

template <class Tag>
bool LiteralSet<Tag>::contains(Literal l) const {
  return std::binary_search(literals_.begin(), literals_.end(), l);
}

template <class Tag>
bool LiteralSet<Tag>::contains_var(Var v) const {
  return contains(Literal::positive(v)) || contains(Literal::negative(v));
}

template <class Tag>
std::string to_string(const LiteralSet<Tag>& set) {
  std::string out = "{";
  bool first = true;
  for (auto l : set) {
    if (!first) out += ", ";
    out += to_string(l);
    first = false;
  }
  return out + "}";
}

template class LiteralSet<ClauseTag>;
template class LiteralSet<CubeTag>;
template std::string to_string(const LiteralSet<ClauseTag>&);
template std::string to_string(const LiteralSet<CubeTag>&);

// --- Prefix -----------------------------------------------------------------

void Prefix::check_fresh(Var v) const {
  if (v == 0) throw FormulaError("variable id 0 is reserved");
  if (declared(v)) throw FormulaError("variable " + std::to_string(v) + " already quantified");
}

int Prefix::add_block(Quantifier q, std::span<const Var> variables) {
  // Validate the whole batch before mutating anything.
  std::vector<Var> batch(variables.begin(), variables.end());
  for (Var v : batch) check_fresh(v);
  std::vector<Var> sorted = batch;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw FormulaError("variable " + std::to_string(*dup) + " already quantified");
  }
  int level = static_cast<int>(blocks_.size()) + 1;
  blocks_.push_back(QuantifierBlock{q, {}, level});
  for (Var v : batch) add_variable(level, v);
  return level;
}

void Prefix::add_variable(int level, Var v) {
  if (level < 1 || level > block_count()) {
    throw FormulaError("no quantifier block at level " + std::to_string(level));
  }
  check_fresh(v);
  if (v >= level_.size()) level_.resize(static_cast<std::size_t>(v) + 1, 0);
  level_[v] = level;
  blocks_[static_cast<std::size_t>(level - 1)].variables.push_back(v);
  ++variable_count_;
}

Quantifier Prefix::quantifier_of(Var v) const {
  if (!declared(v)) throw FormulaError("variable " + std::to_string(v) + " is not quantified");
  return blocks_[static_cast<std::size_t>(level_[v] - 1)].quantifier;
}

const QuantifierBlock& Prefix::block(int level) const {
  if (level < 1 || level > block_count()) {
    throw FormulaError("no quantifier block at level " + std::to_string(level));
  }
  return blocks_[static_cast<std::size_t>(level - 1)];
}

Var Prefix::max_var() const {
  for (std::size_t v = level_.size(); v-- > 1;) {
    if (level_[v] != 0) return static_cast<Var>(v);
  }
  return 0;
}

Prefix Prefix::normalized() const {
  Prefix out;
  for (const auto& b : blocks_) {
    if (b.variables.empty()) continue;
    if (!out.blocks_.empty() && out.blocks_.back().quantifier == b.quantifier) {
      for (Var v : b.variables) out.add_variable(out.block_count(), v);
    } else {
      out.add_block(b.quantifier, b.variables);
    }
  }
  return out;
}

// --- QbfFormula -------------------------------------------------------------

QbfFormula::QbfFormula() { frames_.push_back(Frame{0, {}}); }

void QbfFormula::add_clause(std::span<const Literal> literals, int frame_id) {
  auto frame = std::find_if(frames_.begin(), frames_.end(),
                            [&](const Frame& f) { return f.id == frame_id; });
  if (frame == frames_.end()) {
    throw FormulaError("frame " + std::to_string(frame_id) + " is not live");
  }
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
  frame->clauses.push_back(std::move(*clause));
}

void QbfFormula::add_clause(std::initializer_list<long> dimacs, int frame_id) {
  std::vector<Literal> lits;
  for (long d : dimacs) lits.push_back(Literal::from_dimacs(d));
  add_clause(lits, frame_id);
}

int QbfFormula::push() {
  int id = top_frame() + 1;
  frames_.push_back(Frame{id, {}});
  return id;
}

void QbfFormula::pop() {
  if (frames_.size() == 1) throw FormulaError("frame 0 cannot be popped");
  frames_.pop_back();
}

std::vector<Clause> QbfFormula::clauses() const {
  std::vector<Clause> out;
  out.reserve(clause_count());
  for (const auto& f : frames_) out.insert(out.end(), f.clauses.begin(), f.clauses.end());
  return out;
}

std::size_t QbfFormula::clause_count() const {
  std::size_t n = 0;
  for (const auto& f : frames_) n += f.clauses.size();
  return n;
}

bool structurally_equal(const QbfFormula& a, const QbfFormula& b) {
  if (!(a.prefix().normalized() == b.prefix().normalized())) return false;
  auto ca = a.clauses();
  auto cb = b.clauses();
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return ca == cb;
}

// --- QDIMACS ----------------------------------------------------------------

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

long parse_number(std::string_view token, std::size_t line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "expected integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

QbfFormula parse_qdimacs(std::string_view text) {
  QbfFormula formula;
  bool have_header = false;
  bool in_clauses = false;
  long declared_vars = 0;
  long declared_clauses = 0;
  long seen_clauses = 0;
  std::vector<std::vector<Literal>> raw_clauses;
  std::vector<std::pair<Quantifier, std::vector<Var>>> raw_blocks;
  std::vector<bool> bound;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "c" || tokens[0][0] == 'c') continue;

    if (tokens[0] == "p") {
      if (have_header) throw ParseError(line_no, "duplicate header");
      if (tokens.size() != 4 || tokens[1] != "cnf") {
        throw ParseError(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
      }
      declared_vars = parse_number(tokens[2], line_no);
      declared_clauses = parse_number(tokens[3], line_no);
      if (declared_vars < 0 || declared_clauses < 0) {
        throw ParseError(line_no, "negative count in header");
      }
      bound.assign(static_cast<std::size_t>(declared_vars) + 1, false);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(line_no, "content before 'p cnf' header");

    bool quantifier_line = tokens[0] == "a" || tokens[0] == "e";
    if (quantifier_line && in_clauses) {
      throw ParseError(line_no, "quantifier line after clauses");
    }
    std::size_t first = quantifier_line ? 1 : 0;
    if (tokens.size() <= first || tokens.back() != "0") {
      throw ParseError(line_no, "line is not terminated by 0");
    }
    std::vector<Literal> lits;
    std::vector<Var> vars;
    for (std::size_t i = first; i + 1 < tokens.size(); ++i) {
      long value = parse_number(tokens[i], line_no);
      if (value == 0) throw ParseError(line_no, "0 in the middle of a line");
      long magnitude = value < 0 ? -value : value;
      if (magnitude > declared_vars) {
        throw ParseError(line_no, "variable " + std::to_string(magnitude) +
                                      " exceeds declared maximum " +
                                      std::to_string(declared_vars));
      }
      if (quantifier_line) {
        if (value < 0) throw ParseError(line_no, "negative variable in quantifier line");
        if (bound[static_cast<std::size_t>(value)]) {
          throw ParseError(line_no, "variable " + std::to_string(value) + " quantified twice");
        }
        bound[static_cast<std::size_t>(value)] = true;
        vars.push_back(static_cast<Var>(value));
      } else {
        lits.push_back(Literal::from_dimacs(value));
      }
    }
    if (quantifier_line) {
      raw_blocks.emplace_back(tokens[0] == "a" ? Quantifier::Forall : Quantifier::Exists,
                              std::move(vars));
    } else {
      in_clauses = true;
      ++seen_clauses;
      if (seen_clauses > declared_clauses) {
        throw ParseError(line_no, "more clauses than declared in header (" +
                                      std::to_string(declared_clauses) + ")");
      }
      raw_clauses.push_back(std::move(lits));
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'p cnf' header");
  if (seen_clauses != declared_clauses) {
    throw ParseError(line_no, "header declares " + std::to_string(declared_clauses) +
                                  " clauses, found " + std::to_string(seen_clauses));
  }

  // Free variables go into an implicit outermost existential block.
  std::vector<Var> free_vars;
  std::vector<bool> listed(bound.size(), false);
  for (const auto& clause : raw_clauses) {
    for (auto l : clause) {
      if (!bound[l.var()] && !listed[l.var()]) {
        listed[l.var()] = true;
        free_vars.push_back(l.var());
      }
    }
  }
  std::sort(free_vars.begin(), free_vars.end());
  if (!free_vars.empty()) formula.add_block(Quantifier::Exists, free_vars);
  for (const auto& [q, vars] : raw_blocks) formula.add_block(q, vars);
  for (const auto& clause : raw_clauses) formula.add_clause(clause, 0);
  return formula;
}

std::string write_qdimacs(const QbfFormula& formula) {
  std::ostringstream out;
  out << "p cnf " << formula.prefix().max_var() << ' ' << formula.clause_count() << '\n';
  for (const auto& block : formula.prefix().blocks()) {
    if (block.variables.empty()) continue;
    out << quantifier_letter(block.quantifier);
    for (Var v : block.variables) out << ' ' << v;
    out << " 0\n";
  }
  for (const auto& frame : formula.frames()) {
    for (const auto& clause : frame.clauses) {
      for (auto l : clause) out << l.to_dimacs() << ' ';
      out << "0\n";
    }
  }
  return out.str();
}

// --- Q-resolution -----------------------------------------------------------

Clause universal_reduce(const Clause& clause, const Prefix& prefix) {
  int max_exists = 0;
  for (auto l : clause) {
    if (prefix.is_existential(l.var())) max_exists = std::max(max_exists, prefix.level_of(l.var()));
  }
  std::vector<Literal> kept;
  kept.reserve(clause.size());
  for (auto l : clause) {
    if (prefix.is_existential(l.var()) || prefix.level_of(l.var()) < max_exists) kept.push_back(l);
  }
  return *Clause::make(kept);
}

Cube existential_reduce(const Cube& cube, const Prefix& prefix) {
  int max_forall = 0;
  for (auto l : cube) {
    if (prefix.is_universal(l.var())) max_forall = std::max(max_forall, prefix.level_of(l.var()));
  }
  std::vector<Literal> kept;
  kept.reserve(cube.size());
  for (auto l : cube) {
    if (prefix.is_universal(l.var()) || prefix.level_of(l.var()) < max_forall) kept.push_back(l);
  }
  return *Cube::make(kept);
}

namespace {

template <class Set>
std::optional<std::vector<Literal>> resolve_union(const Set& positive, const Set& negative,
                                                  Var pivot) {
  if (!positive.contains(Literal::positive(pivot))) {
    throw std::invalid_argument("pivot " + std::to_string(pivot) +
                                " does not occur positively in the first operand");
  }
  if (!negative.contains(Literal::negative(pivot))) {
    throw std::invalid_argument("pivot " + std::to_string(pivot) +
                                " does not occur negatively in the second operand");
  }
  std::vector<Literal> merged;
  merged.reserve(positive.size() + negative.size());
  std::merge(positive.begin(), positive.end(), negative.begin(), negative.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::erase_if(merged, [&](Literal l) { return l.var() == pivot; });
  for (std::size_t i = 1; i < merged.size(); ++i) {
    if (merged[i].var() == merged[i - 1].var()) return std::nullopt;
  }
  return merged;
}

}  // namespace

std::optional<Clause> q_resolve(const Clause& positive, const Clause& negative, Var pivot,
                                const Prefix& prefix) {
  if (!prefix.is_existential(pivot)) {
    throw std::invalid_argument("clause resolution pivot " + std::to_string(pivot) +
                                " is not existential");
  }
  auto merged = resolve_union(positive, negative, pivot);
  if (!merged) return std::nullopt;
  return universal_reduce(*Clause::make(*merged), prefix);
}

std::optional<Cube> q_resolve(const Cube& positive, const Cube& negative, Var pivot,
                              const Prefix& prefix) {
  if (!prefix.is_universal(pivot)) {
    throw std::invalid_argument("cube resolution pivot " + std::to_string(pivot) +
                                " is not universal");
  }
  auto merged = resolve_union(positive, negative, pivot);
  if (!merged) return std::nullopt;
  return existential_reduce(*Cube::make(*merged), prefix);
}

}  // namespace qbfplan
