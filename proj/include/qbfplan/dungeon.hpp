#pragma once

// Seeded generator for Dungeon instances.
//
// The player picks at most one item per pool, may trade ingredient items for
// a recipe's product, and wins by defeating any monster. A monster needs a
// set of held items and is obstructed by forbidden ones. Forced dungeon
// items are unknown in the initial state; recipes can also absorb items,
// which is the only way to get rid of an obstructive one.
//
// The first fight enters the dungeon. In v0 nothing can be picked or built
// once inside; v1 allows it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qbfplan {

enum class DungeonVariant { V0, V1 };

std::string to_string(DungeonVariant v);
DungeonVariant parse_variant(const std::string& text);

struct DungeonParams {
  int pools = 2;
  int items_per_pool = 2;
  int monsters = 2;
  int recipes = 1;
  int unknown_items = 1;
  DungeonVariant variant = DungeonVariant::V0;
  std::uint64_t seed = 1;
  // Table shapes.
  int max_required = 2;     // items a monster needs
  int max_forbidden = 1;    // items that obstruct a monster
  int max_ingredients = 2;  // items a recipe consumes
  int max_absorbed = 1;     // extra items a recipe removes

  int total_items() const { return pools * items_per_pool + recipes; }
  void validate() const;  // throws std::invalid_argument
};

struct DungeonInstance {
  std::string name;
  std::string domain;
  std::string problem;
};

DungeonInstance generate(const DungeonParams& params);

struct SuiteSpec {
  int count = 10;
  DungeonParams smallest;
  DungeonParams largest;
  DungeonVariant variant = DungeonVariant::V0;
  std::uint64_t base_seed = 1;
};

struct SuiteEntry {
  std::string id;
  DungeonParams params;
  DungeonInstance instance;
};

// Parameters interpolate linearly from `smallest` to `largest`, so sizes
// never decrease along the suite.
std::vector<SuiteEntry> generate_suite(const SuiteSpec& spec);

// One line per entry: "id=... variant=v0 pools=... seed=...".
std::string suite_manifest(const std::vector<SuiteEntry>& entries);

// Writes <id>.domain.pddl, <id>.problem.pddl and manifest.txt into dir.
void write_suite(const std::vector<SuiteEntry>& entries, const std::filesystem::path& dir);

}  // namespace qbfplan
