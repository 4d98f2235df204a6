#pragma once

// Conformant planning model: a STRIPS + typing (+ negative preconditions)
// PDDL fragment with `(unknown <atom>)` entries in :init, a CNF goal, and an
// exhaustive fail-safe plan verifier over all completions of the unknowns.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qbfplan {

class PddlError : public std::runtime_error {
 public:
  PddlError(std::string source, int line, int column, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + what),
        source_(std::move(source)),
        line_(line),
        column_(column) {}
  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string source_;
  int line_;
  int column_;
};

struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  std::string name() const;  // "(pred a b)"
  auto operator<=>(const Atom&) const = default;
};

// Term starting with '?' is a parameter, anything else a constant.
struct SchemaAtom {
  std::string predicate;
  std::vector<std::string> terms;
};

struct SchemaLiteral {
  SchemaAtom atom;
  bool negated = false;
};

struct TypedName {
  std::string name;
  std::string type;
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedName> parameters;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> parameters;
  std::vector<SchemaLiteral> precondition;
  std::vector<SchemaAtom> add;
  std::vector<SchemaAtom> del;
};

struct GoalLiteral {
  Atom atom;
  bool negated = false;
};

using GoalClause = std::vector<GoalLiteral>;

struct LiftedInstance {
  std::string domain_name;
  std::string problem_name;
  std::vector<std::string> requirements;
  std::map<std::string, std::string> types;    // type -> parent ("object" is the root)
  std::map<std::string, std::string> objects;  // constants and objects -> type
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> actions;
  std::vector<Atom> init_true;
  std::vector<Atom> init_unknown;
  std::vector<GoalClause> goal;

  const PredicateSchema* predicate(std::string_view name) const;
  bool is_subtype(const std::string& type, const std::string& ancestor) const;
  std::vector<std::string> objects_of(const std::string& type) const;  // sorted
};

LiftedInstance parse_pddl(std::string_view domain_text, std::string_view problem_text);

// --- ground model -------------------------------------------------------

using FluentId = std::uint32_t;
using ActionId = std::uint32_t;

inline constexpr std::string_view kNoop = "noop";

struct FluentLiteral {
  FluentId fluent = 0;
  bool negated = false;
  auto operator<=>(const FluentLiteral&) const = default;
};

struct GroundAction {
  std::string name;  // "(pick i1 p1)"
  std::vector<FluentLiteral> precondition;
  std::vector<FluentId> add;
  std::vector<FluentId> del;
  int first_layer = 0;  // first relaxed layer where it is applicable
};

struct GroundInstance {
  std::vector<std::string> fluents;
  std::vector<GroundAction> actions;
  std::vector<FluentId> init_true;
  std::vector<FluentId> init_unknown;
  std::vector<std::vector<FluentLiteral>> goal;
  int grounded_upto = 0;  // plan length covered by the action set

  std::optional<FluentId> find_fluent(std::string_view name) const;
  std::optional<ActionId> find_action(std::string_view name) const;
};

// Structured text dump of a ground instance.
std::string write_ground(const GroundInstance& ground);

struct Plan {
  std::vector<std::string> steps;
  std::size_t length() const { return steps.size(); }
  bool operator==(const Plan&) const = default;
};

std::string to_string(const Plan& plan);

enum class FailureReason { Precondition, Goal };

struct PlanFailure {
  std::map<FluentId, bool> completion;  // values of the unknown fluents
  std::size_t step = 0;                  // plan.length() for goal failures
  FailureReason reason = FailureReason::Goal;
};

struct VerifyResult {
  std::optional<PlanFailure> failure;
  bool valid() const { return !failure.has_value(); }
};

struct VerifyOptions {
  std::size_t unknown_cap = 16;
};

// Checks the plan in every completion of the unknown fluents. Throws
// std::invalid_argument for unknown action names or when the cap is exceeded.
VerifyResult verify_plan(const GroundInstance& ground, const Plan& plan,
                         const VerifyOptions& options = {});

// Replays one completion; returns the failure if the plan fails in it.
std::optional<PlanFailure> simulate(const GroundInstance& ground, const Plan& plan,
                                    const std::map<FluentId, bool>& completion);

}  // namespace qbfplan
