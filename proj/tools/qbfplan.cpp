#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qbfplan/dungeon.hpp"
#include "qbfplan/formula.hpp"
#include "qbfplan/grounder.hpp"
#include "qbfplan/oracle.hpp"
#include "qbfplan/planning.hpp"
#include "qbfplan/solver.hpp"
#include "qbfplan/workflow.hpp"

using namespace qbfplan;

namespace {

constexpr int kExitPlan = 0;
constexpr int kExitNoPlan = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 3;
constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_witness(const Assignment& a) {
  std::cout << "v";
  for (auto [v, value] : a) std::cout << " " << (value ? "" : "-") << v;
  std::cout << " 0\n";
}

struct PlanArgs {
  std::string domain;
  std::string problem;
  std::string mode = "inc";
  int upper_bound = 200;
  double timeout = 0;
  std::size_t memory_mb = 0;
  bool use_lower_bound = false;
  std::string dump_qdimacs;
  std::string dump_ground;
  std::string stats;
  std::uint64_t seed = 0;
  std::string name;
};

int run_plan(const PlanArgs& args) {
  LiftedInstance lifted = parse_pddl(slurp(args.domain), slurp(args.problem));
  WorkflowConfig config;
  config.mode = args.mode == "inc" ? WorkflowMode::Incremental : WorkflowMode::NonIncremental;
  config.upper_bound = args.upper_bound;
  if (args.timeout > 0) config.timeout_seconds = args.timeout;
  if (args.memory_mb > 0) config.memory_mb = args.memory_mb;
  config.use_lower_bound = args.use_lower_bound;
  if (!args.dump_qdimacs.empty()) config.dump_qdimacs = args.dump_qdimacs;
  if (!args.dump_ground.empty()) config.dump_ground = args.dump_ground;
  config.seed = args.seed;
  config.instance_name = args.name;
  if (config.instance_name.empty()) {
    config.instance_name = std::filesystem::path(args.problem).stem().string();
    const std::string suffix = ".problem";
    if (config.instance_name.size() > suffix.size() && config.instance_name.ends_with(suffix))
      config.instance_name.resize(config.instance_name.size() - suffix.size());
  }

  WorkflowResult r = run_workflow(lifted, config);
  if (!args.stats.empty()) emit_stats({{config.instance_name, config.mode, r}}, args.stats);

  for (const auto& l : r.lengths) {
    std::cerr << "c k=" << l.k << " status=" << (l.status == SolveStatus::Sat ? "sat" : l.status == SolveStatus::Unsat ? "unsat" : "unknown")
              << " assignments=" << l.assignments << " backtracks=" << l.backtracks << " seconds=" << l.seconds
              << "\n";
  }
  switch (r.outcome) {
    case WorkflowOutcome::PlanFound:
      std::cout << "plan found, length " << r.k << (r.verified ? " (verified)" : " (not verified)") << "\n";
      std::cout << to_string(r.plan);
      return kExitPlan;
    case WorkflowOutcome::NoPlan:
      if (r.short_circuit) {
        std::cout << "no plan: goal unreachable in the relaxation\n";
      } else {
        std::cout << "no plan up to length " << r.bound << "\n";
      }
      return kExitNoPlan;
    case WorkflowOutcome::Timeout:
      std::cout << "timeout\n";
      return kExitBudget;
    case WorkflowOutcome::Memout:
      std::cout << "memout\n";
      return kExitBudget;
  }
  return kExitUsage;
}

int run_solve(const std::string& path, double timeout, std::uint64_t seed) {
  QbfFormula f = parse_qdimacs(slurp(path));
  SolverOptions options;
  options.seed = seed;
  Solver solver(options);
  solver.load(f);
  SolverLimits limits;
  if (timeout > 0) {
    limits.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(timeout));
  }
  SolveOutcome out = solver.solve(limits);
  SolverStats s = solver.stats();
  std::cerr << "c assignments=" << s.assignments << " backtracks=" << s.backtracks << " conflicts=" << s.conflicts
            << " solutions=" << s.solutions << " learned_clauses=" << s.learned_clauses
            << " learned_cubes=" << s.learned_cubes << "\n";
  if (out.status == SolveStatus::Unknown) {
    std::cout << "s cnf -1\n";
    return kExitBudget;
  }
  bool sat = out.status == SolveStatus::Sat;
  std::cout << "s cnf " << (sat ? 1 : 0) << "\n";
  if (out.outer_assignment) print_witness(*out.outer_assignment);
  return sat ? kExitSat : kExitUnsat;
}

int run_oracle(const std::string& path, std::size_t cap) {
  QbfFormula f = parse_qdimacs(slurp(path));
  OracleOptions options;
  options.variable_cap = cap;
  OracleResult r = evaluate(f, options);
  bool sat = r.status == QbfStatus::Sat;
  std::cout << "s cnf " << (sat ? 1 : 0) << "\n";
  if (r.outer_witness) print_witness(*r.outer_witness);
  return sat ? kExitSat : kExitUnsat;
}

struct GenArgs {
  DungeonParams params;
  std::string variant = "v0";
  std::string out = ".";
  int suite = 0;
  DungeonParams to;
};

int run_gen(GenArgs args) {
  args.params.variant = parse_variant(args.variant);
  if (args.suite > 0) {
    SuiteSpec spec;
    spec.count = args.suite;
    spec.smallest = args.params;
    spec.largest = args.to;
    spec.variant = args.params.variant;
    spec.base_seed = args.params.seed;
    auto entries = generate_suite(spec);
    write_suite(entries, args.out);
    std::cout << "wrote " << entries.size() << " instances to " << args.out << "\n";
    return 0;
  }
  DungeonInstance inst = generate(args.params);
  std::filesystem::create_directories(args.out);
  std::filesystem::path dir(args.out);
  std::ofstream(dir / (inst.name + ".domain.pddl"), std::ios::binary) << inst.domain;
  std::ofstream(dir / (inst.name + ".problem.pddl"), std::ios::binary) << inst.problem;
  std::cout << (dir / (inst.name + ".domain.pddl")).string() << "\n"
            << (dir / (inst.name + ".problem.pddl")).string() << "\n";
  return 0;
}

void dungeon_options(CLI::App* cmd, DungeonParams& p, const std::string& prefix, const std::string& note) {
  cmd->add_option("--" + prefix + "pools", p.pools, "Item pools" + note)->check(CLI::NonNegativeNumber);
  cmd->add_option("--" + prefix + "items-per-pool", p.items_per_pool, "Items in each pool" + note)
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--" + prefix + "monsters", p.monsters, "Monsters" + note)->check(CLI::NonNegativeNumber);
  cmd->add_option("--" + prefix + "recipes", p.recipes, "Recipes" + note)->check(CLI::NonNegativeNumber);
  cmd->add_option("--" + prefix + "unknown-items", p.unknown_items, "Forced dungeon items" + note)
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformant planning with incremental QBF solving"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Find an optimal-length fail-safe plan");
  plan_cmd->add_option("domain", plan.domain, "Domain PDDL file")->required();
  plan_cmd->add_option("problem", plan.problem, "Problem PDDL file")->required();
  plan_cmd->add_option("--mode", plan.mode, "inc or noninc")->check(CLI::IsMember({"inc", "noninc"}));
  plan_cmd->add_option("--upper-bound", plan.upper_bound, "Largest plan length tried")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--timeout", plan.timeout, "Wall-clock budget in seconds (0: none)")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--memory", plan.memory_mb, "Soft memory budget in MB");
  plan_cmd->add_flag("--use-lower-bound", plan.use_lower_bound, "Start at the relaxed lower bound");
  plan_cmd->add_option("--dump-qdimacs", plan.dump_qdimacs, "Write every QBF_k into this directory");
  plan_cmd->add_option("--dump-ground", plan.dump_ground, "Write the final grounding to this file");
  plan_cmd->add_option("--stats", plan.stats, "Write statistics CSV");
  plan_cmd->add_option("--seed", plan.seed, "Solver seed");
  plan_cmd->add_option("--name", plan.name, "Instance name for dumps and statistics");

  std::string qbf_path;
  double solve_timeout = 0;
  std::uint64_t solve_seed = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a QDIMACS file");
  solve_cmd->add_option("file", qbf_path, "QDIMACS file")->required();
  solve_cmd->add_option("--timeout", solve_timeout, "Seconds");
  solve_cmd->add_option("--seed", solve_seed, "Solver seed");

  std::size_t cap = 30;
  auto* oracle_cmd = app.add_subcommand("oracle", "Evaluate a small QDIMACS file by expansion");
  oracle_cmd->add_option("file", qbf_path, "QDIMACS file")->required();
  oracle_cmd->add_option("--cap", cap, "Variable cap");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dungeon", "Generate Dungeon instances");
  dungeon_options(gen_cmd, gen.params, "", "");
  gen_cmd->add_option("--variant", gen.variant, "v0 or v1")->check(CLI::IsMember({"v0", "v1"}));
  gen_cmd->add_option("--seed", gen.params.seed, "Generator seed");
  gen_cmd->add_option("--max-required", gen.params.max_required, "Items a monster needs");
  gen_cmd->add_option("--max-forbidden", gen.params.max_forbidden, "Items obstructing a monster");
  gen_cmd->add_option("--max-ingredients", gen.params.max_ingredients, "Ingredients per recipe");
  gen_cmd->add_option("--max-absorbed", gen.params.max_absorbed, "Items a recipe removes");
  gen_cmd->add_option("--out", gen.out, "Output directory");
  gen_cmd->add_option("--suite", gen.suite, "Generate a suite of this many instances");
  dungeon_options(gen_cmd, gen.to, "to-", " of the last suite instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*plan_cmd) return run_plan(plan);
    if (*solve_cmd) return run_solve(qbf_path, solve_timeout, solve_seed);
    if (*oracle_cmd) return run_oracle(qbf_path, cap);
    if (*gen_cmd) {
      // Suite end point defaults to the start point.
      if (gen_cmd->count("--to-pools") == 0) gen.to.pools = gen.params.pools;
      if (gen_cmd->count("--to-items-per-pool") == 0) gen.to.items_per_pool = gen.params.items_per_pool;
      if (gen_cmd->count("--to-monsters") == 0) gen.to.monsters = gen.params.monsters;
      if (gen_cmd->count("--to-recipes") == 0) gen.to.recipes = gen.params.recipes;
      if (gen_cmd->count("--to-unknown-items") == 0) gen.to.unknown_items = gen.params.unknown_items;
      return run_gen(gen);
    }
  } catch (const GroundingLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
