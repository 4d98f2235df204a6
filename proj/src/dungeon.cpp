#include "qbfplan/dungeon.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qbfplan {

std::string to_string(DungeonVariant v) { return v == DungeonVariant::V0 ? "v0" : "v1"; }

DungeonVariant parse_variant(const std::string& text) {
  if (text == "v0") return DungeonVariant::V0;
  if (text == "v1") return DungeonVariant::V1;
  throw std::invalid_argument("unknown dungeon variant " + text);
}

void DungeonParams::validate() const {
  auto non_negative = [](int v, const char* what) {
    if (v < 0) throw std::invalid_argument(std::string(what) + " must be non-negative");
  };
  non_negative(pools, "pools");
  non_negative(items_per_pool, "items_per_pool");
  non_negative(monsters, "monsters");
  non_negative(recipes, "recipes");
  non_negative(unknown_items, "unknown_items");
  non_negative(max_required, "max_required");
  non_negative(max_forbidden, "max_forbidden");
  non_negative(max_ingredients, "max_ingredients");
  non_negative(max_absorbed, "max_absorbed");
  if (unknown_items > total_items()) {
    throw std::invalid_argument("unknown_items exceeds the number of items");
  }
}

namespace {

// The mapping from engine output to choices is fixed here rather than left to
// std distributions, whose output differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

struct Item {
  std::string name;
  int pool = -1;  // -1 for recipe products
};

struct Recipe {
  std::vector<int> ingredients;
  std::vector<int> absorbed;
  int product = 0;
};

struct Monster {
  std::vector<int> required;
  std::vector<int> forbidden;
};

// Up to `count` items with no two from the same pool.
std::vector<int> compatible_sample(Rng& rng, const std::vector<Item>& items, std::vector<int> pool,
                                  int count) {
  rng.shuffle(pool);
  std::vector<int> chosen;
  std::set<int> pools_used;
  for (int i : pool) {
    if (static_cast<int>(chosen.size()) >= count) break;
    int p = items[static_cast<std::size_t>(i)].pool;
    if (p >= 0 && !pools_used.insert(p).second) continue;
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::string holds_list(const std::vector<Item>& items, const std::vector<int>& ids, bool negated) {
  std::string s;
  for (int i : ids) {
    std::string atom = "(holds " + items[static_cast<std::size_t>(i)].name + ")";
    s += " " + (negated ? "(not " + atom + ")" : atom);
  }
  return s;
}

}  // namespace

DungeonInstance generate(const DungeonParams& params) {
  params.validate();
  Rng rng(params.seed);
  bool v0 = params.variant == DungeonVariant::V0;

  std::vector<Item> items;
  for (int p = 0; p < params.pools; ++p) {
    for (int j = 0; j < params.items_per_pool; ++j) {
      items.push_back({"i" + std::to_string(p + 1) + "-" + std::to_string(j + 1), p});
    }
  }
  std::vector<int> pool_items(items.size());
  for (std::size_t i = 0; i < pool_items.size(); ++i) pool_items[i] = static_cast<int>(i);

  // Unknown items are drawn before the products exist, so reserve their
  // indices: products occupy the tail of the item list.
  int n_pool_items = static_cast<int>(items.size());
  for (int r = 0; r < params.recipes; ++r) items.push_back({"prod" + std::to_string(r + 1), -1});
  std::vector<int> all(items.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<int> unknown = all;
  rng.shuffle(unknown);
  unknown.resize(static_cast<std::size_t>(params.unknown_items));
  std::sort(unknown.begin(), unknown.end());

  std::vector<Recipe> recipes;
  for (int r = 0; r < params.recipes; ++r) {
    Recipe recipe;
    recipe.product = n_pool_items + r;
    // Ingredients come from pools and earlier products only (acyclic).
    std::vector<int> sources(pool_items);
    for (int q = 0; q < r; ++q) sources.push_back(n_pool_items + q);
    int want = params.max_ingredients <= 1 ? params.max_ingredients : rng.between(2, params.max_ingredients);
    recipe.ingredients = compatible_sample(rng, items, sources, want);
    std::vector<int> absorbable;
    for (int u : unknown) {
      if (u != recipe.product &&
          std::find(recipe.ingredients.begin(), recipe.ingredients.end(), u) == recipe.ingredients.end()) {
        absorbable.push_back(u);
      }
    }
    rng.shuffle(absorbable);
    int absorb = std::min<int>(rng.between(0, params.max_absorbed), static_cast<int>(absorbable.size()));
    recipe.absorbed.assign(absorbable.begin(), absorbable.begin() + absorb);
    std::sort(recipe.absorbed.begin(), recipe.absorbed.end());
    recipes.push_back(std::move(recipe));
  }

  std::vector<Monster> monsters;
  for (int m = 0; m < params.monsters; ++m) {
    Monster monster;
    int want = params.max_required == 0 ? 0 : rng.between(1, params.max_required);
    // Stronger monsters ask for a recipe product when there is one.
    std::vector<int> sources = pool_items;
    if (params.recipes > 0 && want > 0 && rng.below(2) == 0) {
      monster.required.push_back(n_pool_items + static_cast<int>(rng.below(static_cast<std::size_t>(params.recipes))));
      --want;
    }
    for (int i : compatible_sample(rng, items, sources, want)) monster.required.push_back(i);
    std::sort(monster.required.begin(), monster.required.end());
    std::vector<int> candidates;
    for (int u : unknown) {
      if (std::find(monster.required.begin(), monster.required.end(), u) == monster.required.end()) {
        candidates.push_back(u);
      }
    }
    rng.shuffle(candidates);
    int forbid = std::min<int>(rng.between(0, params.max_forbidden), static_cast<int>(candidates.size()));
    monster.forbidden.assign(candidates.begin(), candidates.begin() + forbid);
    std::sort(monster.forbidden.begin(), monster.forbidden.end());
    monsters.push_back(std::move(monster));
  }

  DungeonInstance out;
  out.name = "dungeon-" + to_string(params.variant) + "-p" + std::to_string(params.pools) + "x" +
             std::to_string(params.items_per_pool) + "-m" + std::to_string(params.monsters) + "-r" +
             std::to_string(params.recipes) + "-u" + std::to_string(params.unknown_items) + "-s" +
             std::to_string(params.seed);
  const std::string outside = v0 ? " (not (entered))" : "";

  std::ostringstream d;
  d << "(define (domain " << out.name << ")\n";
  d << "  (:requirements :strips :typing :negative-preconditions)\n";
  d << "  (:types item pool monster)\n";
  d << "  (:constants";
  for (const auto& item : items) d << " " << item.name;
  if (!items.empty()) d << " - item";
  for (int p = 0; p < params.pools; ++p) d << " p" << p + 1;
  if (params.pools > 0) d << " - pool";
  for (int m = 0; m < params.monsters; ++m) d << " m" << m + 1;
  if (params.monsters > 0) d << " - monster";
  d << ")\n";
  d << "  (:predicates (holds ?i - item) (used ?p - pool) (in-pool ?i - item ?p - pool)\n";
  d << "               (defeated ?m - monster) (entered))\n";
  d << "  (:action pick\n";
  d << "    :parameters (?i - item ?p - pool)\n";
  d << "    :precondition (and (in-pool ?i ?p) (not (used ?p))" << outside << ")\n";
  d << "    :effect (and (used ?p) (holds ?i)))\n";
  for (std::size_t r = 0; r < recipes.size(); ++r) {
    const Recipe& recipe = recipes[r];
    d << "  (:action build-r" << r + 1 << "\n";
    d << "    :parameters ()\n";
    d << "    :precondition (and" << holds_list(items, recipe.ingredients, false) << outside << ")\n";
    std::vector<int> removed = recipe.ingredients;
    removed.insert(removed.end(), recipe.absorbed.begin(), recipe.absorbed.end());
    d << "    :effect (and (holds " << items[static_cast<std::size_t>(recipe.product)].name << ")"
      << holds_list(items, removed, true) << "))\n";
  }
  for (std::size_t m = 0; m < monsters.size(); ++m) {
    const Monster& monster = monsters[m];
    d << "  (:action fight-m" << m + 1 << "\n";
    d << "    :parameters ()\n";
    d << "    :precondition (and" << holds_list(items, monster.required, false)
      << holds_list(items, monster.forbidden, true) << ")\n";
    d << "    :effect (and (defeated m" << m + 1 << ") (entered)))\n";
  }
  d << ")\n";
  out.domain = d.str();

  std::ostringstream p;
  p << "(define (problem " << out.name << ")\n";
  p << "  (:domain " << out.name << ")\n";
  p << "  (:init";
  for (int i = 0; i < n_pool_items; ++i) {
    const Item& item = items[static_cast<std::size_t>(i)];
    p << "\n    (in-pool " << item.name << " p" << item.pool + 1 << ")";
  }
  for (int u : unknown) p << "\n    (unknown (holds " << items[static_cast<std::size_t>(u)].name << "))";
  p << ")\n";
  p << "  (:goal (or";
  for (int m = 0; m < params.monsters; ++m) p << " (defeated m" << m + 1 << ")";
  p << ")))\n";
  out.problem = p.str();
  return out;
}

std::vector<SuiteEntry> generate_suite(const SuiteSpec& spec) {
  std::vector<SuiteEntry> entries;
  auto lerp = [&](int lo, int hi, int i) {
    if (spec.count <= 1) return lo;
    return lo + (hi - lo) * i / (spec.count - 1);
  };
  for (int i = 0; i < spec.count; ++i) {
    DungeonParams p = spec.smallest;
    const DungeonParams& a = spec.smallest;
    const DungeonParams& b = spec.largest;
    p.pools = lerp(a.pools, b.pools, i);
    p.items_per_pool = lerp(a.items_per_pool, b.items_per_pool, i);
    p.monsters = lerp(a.monsters, b.monsters, i);
    p.recipes = lerp(a.recipes, b.recipes, i);
    p.unknown_items = std::min(lerp(a.unknown_items, b.unknown_items, i), p.total_items());
    p.variant = spec.variant;
    p.seed = spec.base_seed + static_cast<std::uint64_t>(i);
    char id[32];
    std::snprintf(id, sizeof id, "d%s-%03d", to_string(spec.variant).c_str(), i);
    entries.push_back({id, p, generate(p)});
  }
  return entries;
}

std::string suite_manifest(const std::vector<SuiteEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) {
    const DungeonParams& p = e.params;
    out << "id=" << e.id << " variant=" << to_string(p.variant) << " pools=" << p.pools
        << " items_per_pool=" << p.items_per_pool << " monsters=" << p.monsters
        << " recipes=" << p.recipes << " unknown_items=" << p.unknown_items
        << " max_required=" << p.max_required << " max_forbidden=" << p.max_forbidden
        << " max_ingredients=" << p.max_ingredients << " max_absorbed=" << p.max_absorbed
        << " seed=" << p.seed << "\n";
  }
  return out.str();
}

void write_suite(const std::vector<SuiteEntry>& entries, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  for (const auto& e : entries) {
    write(dir / (e.id + ".domain.pddl"), e.instance.domain);
    write(dir / (e.id + ".problem.pddl"), e.instance.problem);
  }
  write(dir / "manifest.txt", suite_manifest(entries));
}

}  // namespace qbfplan
