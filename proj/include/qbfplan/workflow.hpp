#pragma once

// Iterative plan-length deepening: ground, encode and solve QBF_k for
// k = start, start + 1, ... until one is satisfiable, the upper bound is
// passed, or a budget runs out.
//
// Incremental mode keeps one solver and moves between lengths by replacing
// the goal frame. Non-incremental mode builds each QBF_k from scratch,
// writes it as QDIMACS, reads it back and solves it with a fresh solver.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbfplan/planning.hpp"
#include "qbfplan/solver.hpp"

namespace qbfplan {

enum class WorkflowMode { Incremental, NonIncremental };

std::string to_string(WorkflowMode m);

struct WorkflowConfig {
  WorkflowMode mode = WorkflowMode::Incremental;
  int upper_bound = 200;
  std::optional<double> timeout_seconds;
  // Soft cap on literals stored by the solver, derived from a megabyte budget.
  std::optional<std::size_t> memory_mb;
  bool use_lower_bound = false;
  std::optional<std::filesystem::path> dump_qdimacs;
  std::optional<std::filesystem::path> dump_ground;
  std::string instance_name = "instance";
  std::uint64_t seed = 0;
  std::size_t max_ground_actions = 200000;
  std::size_t verify_cap = 16;
};

enum class WorkflowOutcome { PlanFound, NoPlan, Timeout, Memout };

std::string to_string(WorkflowOutcome o);

struct LengthRecord {
  int k = 0;
  SolveStatus status = SolveStatus::Unknown;
  std::uint64_t assignments = 0;
  std::uint64_t backtracks = 0;
  double seconds = 0.0;  // grounding + encoding + solving for this length
};

struct WorkflowResult {
  WorkflowOutcome outcome = WorkflowOutcome::NoPlan;
  Plan plan;
  int k = -1;          // plan length when a plan was found
  int bound = 0;       // upper bound in force
  int lower_bound = 0; // relaxed lower bound (kInfiniteBound if unreachable)
  bool short_circuit = false;  // no plan decided by the lower bound alone
  bool verified = false;       // plan checked over all completions
  std::vector<LengthRecord> lengths;
  std::uint64_t assignments = 0;
  std::uint64_t backtracks = 0;
  double seconds = 0.0;
};

WorkflowResult run_workflow(const LiftedInstance& lifted, const WorkflowConfig& config);

struct StatsRow {
  std::string instance;
  WorkflowMode mode = WorkflowMode::Incremental;
  WorkflowResult result;
};

// CSV columns: instance,mode,row,k,status,assignments,backtracks,seconds.
// `row` is "length" for one QBF_k and "summary" for the whole instance.
std::string stats_csv(const std::vector<StatsRow>& rows);
void emit_stats(const std::vector<StatsRow>& rows, const std::filesystem::path& path);

}  // namespace qbfplan
