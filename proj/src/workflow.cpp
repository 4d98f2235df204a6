#include "qbfplan/workflow.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "qbfplan/encoder.hpp"
#include "qbfplan/grounder.hpp"

#include <unistd.h>

namespace qbfplan {

std::string to_string(WorkflowMode m) { return m == WorkflowMode::Incremental ? "inc" : "noninc"; }

std::string to_string(WorkflowOutcome o) {
  switch (o) {
    case WorkflowOutcome::PlanFound:
      return "plan_found";
    case WorkflowOutcome::NoPlan:
      return "no_plan";
    case WorkflowOutcome::Timeout:
      return "timeout";
    case WorkflowOutcome::Memout:
      return "memout";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

// Rough bytes per stored literal, occurrence lists included.
constexpr std::size_t kBytesPerLiteral = 16;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path qdimacs_path(const std::filesystem::path& dir, const std::string& name, int k) {
  return dir / (name + "_k" + std::to_string(k) + ".qdimacs");
}

// One QBF_k per call, either from the persistent solver or from a file.
class LengthSolver {
 public:
  virtual ~LengthSolver() = default;
  virtual void prepare(GroundInstance& ground, int k) = 0;
  virtual SolveOutcome solve(const SolverLimits& limits) = 0;
  virtual Plan decode(const SolveOutcome& outcome) const = 0;
};

class IncrementalSolver : public LengthSolver {
 public:
  IncrementalSolver(const WorkflowConfig& config) : config_(config), solver_(options(config)), target_(solver_) {}

  void prepare(GroundInstance& ground, int k) override {
    if (!encoder_) {
      encoder_.emplace(target_, ground);
      encoder_->encode_initial(k);
    } else {
      encoder_->extend_to(ground, k);
    }
    if (config_.dump_qdimacs) {
      write_file(qdimacs_path(*config_.dump_qdimacs, config_.instance_name, k), write_qdimacs(solver_.snapshot()));
    }
  }

  SolveOutcome solve(const SolverLimits& limits) override { return solver_.solve(limits); }

  Plan decode(const SolveOutcome& outcome) const override {
    return encoder_->decode_plan(outcome.outer_assignment.value_or(Assignment{}));
  }

 private:
  static SolverOptions options(const WorkflowConfig& config) {
    SolverOptions o;
    o.seed = config.seed;
    return o;
  }

  const WorkflowConfig& config_;
  Solver solver_;
  SolverTarget target_;
  std::optional<Encoder> encoder_;
};

class FileSolver : public LengthSolver {
 public:
  explicit FileSolver(const WorkflowConfig& config) : config_(config) {}

  void prepare(GroundInstance& ground, int k) override {
    formula_ = QbfFormula();
    target_.emplace(formula_);
    encoder_.emplace(*target_, ground);
    encoder_->encode_initial(k);
    std::filesystem::path path;
    bool keep = config_.dump_qdimacs.has_value();
    if (keep) {
      path = qdimacs_path(*config_.dump_qdimacs, config_.instance_name, k);
    } else {
      path = std::filesystem::temp_directory_path() /
             ("qbfplan-" + std::to_string(::getpid()) + "-" + config_.instance_name + "_k" +
              std::to_string(k) + ".qdimacs");
    }
    write_file(path, write_qdimacs(formula_));
    QbfFormula parsed = parse_qdimacs(read_file(path));
    if (!keep) std::filesystem::remove(path);
    SolverOptions o;
    o.seed = config_.seed;
    solver_.emplace(o);
    solver_->load(parsed);
  }

  SolveOutcome solve(const SolverLimits& limits) override { return solver_->solve(limits); }

  Plan decode(const SolveOutcome& outcome) const override {
    return encoder_->decode_plan(outcome.outer_assignment.value_or(Assignment{}));
  }

 private:
  const WorkflowConfig& config_;
  QbfFormula formula_;
  std::optional<FormulaTarget> target_;
  std::optional<Encoder> encoder_;
  std::optional<Solver> solver_;
};

}  // namespace

WorkflowResult run_workflow(const LiftedInstance& lifted, const WorkflowConfig& config) {
  if (config.upper_bound < 0) throw std::invalid_argument("upper bound must be non-negative");
  if (config.timeout_seconds && !(*config.timeout_seconds > 0)) throw std::invalid_argument("timeout must be positive");
  if (config.memory_mb && *config.memory_mb == 0) throw std::invalid_argument("memory budget must be positive");
  Clock::time_point start = Clock::now();
  SolverLimits limits;
  if (config.timeout_seconds) {
    limits.deadline = start + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(*config.timeout_seconds));
  }
  if (config.memory_mb) limits.max_literals = (*config.memory_mb << 20) / kBytesPerLiteral;
  if (config.dump_qdimacs) std::filesystem::create_directories(*config.dump_qdimacs);

  WorkflowResult result;
  result.bound = config.upper_bound;
  GrounderOptions grounder_options;
  grounder_options.max_ground_actions = config.max_ground_actions;
  Grounder grounder(lifted, grounder_options);
  result.lower_bound = grounder.lower_bound();

  auto finish = [&](WorkflowOutcome outcome) {
    result.outcome = outcome;
    result.seconds = seconds_since(start);
    return result;
  };

  int start_k = 0;
  if (config.use_lower_bound) {
    if (result.lower_bound == kInfiniteBound || result.lower_bound > config.upper_bound) {
      result.short_circuit = true;
      return finish(WorkflowOutcome::NoPlan);
    }
    start_k = result.lower_bound;
  }

  std::unique_ptr<LengthSolver> solver;
  if (config.mode == WorkflowMode::Incremental) {
    solver = std::make_unique<IncrementalSolver>(config);
  } else {
    solver = std::make_unique<FileSolver>(config);
  }

  GroundInstance ground = grounder.ground_upto(start_k);
  auto timed_out = [&] { return limits.deadline && Clock::now() >= *limits.deadline; };

  for (int k = start_k; k <= config.upper_bound; ++k) {
    Clock::time_point step_start = Clock::now();
    if (timed_out()) return finish(WorkflowOutcome::Timeout);
    if (k > start_k) grounder.extend(ground, k);
    solver->prepare(ground, k);
    if (timed_out()) return finish(WorkflowOutcome::Timeout);
    SolveOutcome outcome = solver->solve(limits);

    LengthRecord record;
    record.k = k;
    record.status = outcome.status;
    record.assignments = outcome.stats_delta.assignments;
    record.backtracks = outcome.stats_delta.backtracks;
    record.seconds = seconds_since(step_start);
    result.lengths.push_back(record);
    result.assignments += record.assignments;
    result.backtracks += record.backtracks;

    if (outcome.status == SolveStatus::Unknown) {
      return finish(outcome.interrupt == Interrupt::Memout ? WorkflowOutcome::Memout : WorkflowOutcome::Timeout);
    }
    if (outcome.status == SolveStatus::Sat) {
      result.plan = solver->decode(outcome);
      result.k = k;
      if (ground.init_unknown.size() <= config.verify_cap) {
        VerifyOptions vo;
        vo.unknown_cap = config.verify_cap;
        VerifyResult check = verify_plan(ground, result.plan, vo);
        if (!check.valid()) {
          throw std::logic_error("plan for " + config.instance_name + " fails verification at step " +
                                 std::to_string(check.failure->step));
        }
        result.verified = true;
      }
      if (config.dump_ground) write_file(*config.dump_ground, write_ground(ground));
      return finish(WorkflowOutcome::PlanFound);
    }
  }
  if (config.dump_ground) write_file(*config.dump_ground, write_ground(ground));
  return finish(WorkflowOutcome::NoPlan);
}

namespace {

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat:
      return "sat";
    case SolveStatus::Unsat:
      return "unsat";
    case SolveStatus::Unknown:
      return "unknown";
  }
  return "?";
}

}  // namespace

std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::ostringstream out;
  out << "instance,mode,row,k,status,assignments,backtracks,seconds\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& row : rows) {
    std::string mode = to_string(row.mode);
    const WorkflowResult& r = row.result;
    for (const auto& l : r.lengths) {
      out << row.instance << "," << mode << ",length," << l.k << "," << status_name(l.status) << ","
          << l.assignments << "," << l.backtracks << "," << l.seconds << "\n";
    }
    std::string status = to_string(r.outcome);
    if (r.short_circuit) status = "no_plan_lower_bound";
    int k = r.bound;
    if (r.outcome == WorkflowOutcome::PlanFound) {
      k = r.k;
    } else if (r.outcome != WorkflowOutcome::NoPlan) {
      k = r.lengths.empty() ? -1 : r.lengths.back().k;
    }
    out << row.instance << "," << mode << ",summary," << k << "," << status << "," << r.assignments << ","
        << r.backtracks << "," << r.seconds << "\n";
  }
  return out.str();
}

void emit_stats(const std::vector<StatsRow>& rows, const std::filesystem::path& path) {
  write_file(path, stats_csv(rows));
}

}  // namespace qbfplan
