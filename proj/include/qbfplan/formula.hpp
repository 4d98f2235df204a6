#pragma once

// Prenex-CNF QBF data model: literals, quantifier prefix, framed clause
// storage, QDIMACS I/O and the Q-resolution primitives.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qbfplan {

using Var = std::uint32_t;

class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(Var var, bool negative)
      : code_((var << 1) | (negative ? 1u : 0u)) {}

  static constexpr Literal positive(Var var) { return Literal(var, false); }
  static constexpr Literal negative(Var var) { return Literal(var, true); }
  static Literal from_dimacs(long value);

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool is_negative() const { return (code_ & 1u) != 0; }
  constexpr bool is_positive() const { return !is_negative(); }
  constexpr Literal operator~() const { return from_code(code_ ^ 1u); }

  // Dense index usable for per-literal arrays: 2 * var + sign.
  constexpr std::uint32_t code() const { return code_; }
  static constexpr Literal from_code(std::uint32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }

  long to_dimacs() const {
    return is_negative() ? -static_cast<long>(var()) : static_cast<long>(var());
  }

  constexpr auto operator<=>(const Literal&) const = default;

 private:
  std::uint32_t code_ = 0;
};

enum class Quantifier : std::uint8_t { Exists, Forall };

inline constexpr char quantifier_letter(Quantifier q) {
  return q == Quantifier::Exists ? 'e' : 'a';
}

class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public FormulaError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : FormulaError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Sorted, duplicate-free, non-tautological set of literals. The tag keeps
// clauses and cubes from being mixed up at compile time.
template <class Tag>
class LiteralSet {
 public:
  LiteralSet() = default;

  // Returns nullopt when the input holds a complementary pair.
  static std::optional<LiteralSet> make(std::span<const Literal> literals);
  static std::optional<LiteralSet> make(std::initializer_list<long> dimacs);

  auto begin() const { return literals_.begin(); }
  auto end() const { return literals_.end(); }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }
  const std::vector<Literal>& literals() const { return literals_; }
  bool contains(Literal l) const;
  bool contains_var(Var v) const;

  bool operator==(const LiteralSet&) const = default;
  auto operator<=>(const LiteralSet&) const = default;

 private:
  std::vector<Literal> literals_;
};

struct ClauseTag;
struct CubeTag;
using Clause = LiteralSet<ClauseTag>;
using Cube = LiteralSet<CubeTag>;

struct QuantifierBlock {
  Quantifier quantifier = Quantifier::Exists;
  std::vector<Var> variables;
  int level = 0;  // 1-based position in the prefix

  bool operator==(const QuantifierBlock&) const = default;
};

class Prefix {
 public:
  // Appends a block at the rightmost position; returns its level.
  int add_block(Quantifier q, std::span<const Var> variables);
  int add_block(Quantifier q, std::initializer_list<Var> variables) {
    return add_block(q, std::span<const Var>(variables.begin(), variables.size()));
  }
  void add_variable(int level, Var v);

  bool declared(Var v) const { return v < level_.size() && level_[v] != 0; }
  // 0 for undeclared variables.
  int level_of(Var v) const { return v < level_.size() ? level_[v] : 0; }
  Quantifier quantifier_of(Var v) const;
  bool is_existential(Var v) const { return quantifier_of(v) == Quantifier::Exists; }
  bool is_universal(Var v) const { return quantifier_of(v) == Quantifier::Forall; }

  const std::vector<QuantifierBlock>& blocks() const { return blocks_; }
  const QuantifierBlock& block(int level) const;
  int block_count() const { return static_cast<int>(blocks_.size()); }
  Var max_var() const;
  std::size_t variable_count() const { return variable_count_; }

  // Drops empty blocks and merges adjacent blocks with equal quantifiers.
  Prefix normalized() const;

  bool operator==(const Prefix& other) const { return blocks_ == other.blocks_; }

 private:
  void check_fresh(Var v) const;

  std::vector<QuantifierBlock> blocks_;
  std::vector<int> level_;
  std::size_t variable_count_ = 0;
};

struct Frame {
  int id = 0;
  std::vector<Clause> clauses;
};

class QbfFormula {
 public:
  QbfFormula();

  int add_block(Quantifier q, std::span<const Var> variables) {
    return prefix_.add_block(q, variables);
  }
  int add_block(Quantifier q, std::initializer_list<Var> variables) {
    return prefix_.add_block(q, variables);
  }
  void add_variable_to_block(int level, Var v) { prefix_.add_variable(level, v); }

  // Adds to the given live frame. Tautologies are dropped and counted.
  void add_clause(std::span<const Literal> literals, int frame_id);
  // Adds to the top frame.
  void add_clause(std::span<const Literal> literals) { add_clause(literals, top_frame()); }
  void add_clause(std::initializer_list<long> dimacs, int frame_id);
  void add_clause(std::initializer_list<long> dimacs) { add_clause(dimacs, top_frame()); }

  int push();
  void pop();
  int top_frame() const { return frames_.back().id; }

  const Prefix& prefix() const { return prefix_; }
  const std::vector<Frame>& frames() const { return frames_; }
  std::vector<Clause> clauses() const;
  std::size_t clause_count() const;
  std::size_t tautologies_dropped() const { return tautologies_dropped_; }

 private:
  Prefix prefix_;
  std::vector<Frame> frames_;
  std::size_t tautologies_dropped_ = 0;
};

// Equality of normalized prefixes and clause multisets; frames are flattened.
bool structurally_equal(const QbfFormula& a, const QbfFormula& b);

QbfFormula parse_qdimacs(std::string_view text);
std::string write_qdimacs(const QbfFormula& formula);

// Removes every universal literal whose level exceeds the level of all
// existential literals of the clause.
Clause universal_reduce(const Clause& clause, const Prefix& prefix);
// Dual for cubes: drops existentials deeper than every universal.
Cube existential_reduce(const Cube& cube, const Prefix& prefix);

// Q-resolution on an existential pivot, positive in `positive`, negative in
// `negative`. The resolvent is universally reduced. Returns nullopt for a
// tautological resolvent. Throws std::invalid_argument when the pivot is not
// existential or the polarities do not match.
std::optional<Clause> q_resolve(const Clause& positive, const Clause& negative, Var pivot,
                                const Prefix& prefix);
// Term resolution on a universal pivot; the resolvent is existentially
// reduced.
std::optional<Cube> q_resolve(const Cube& positive, const Cube& negative, Var pivot,
                              const Prefix& prefix);

std::string to_string(const Literal& l);
template <class Tag>
std::string to_string(const LiteralSet<Tag>& set);

}  // namespace qbfplan
