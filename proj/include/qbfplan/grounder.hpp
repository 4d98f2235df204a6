#pragma once

// Relevance-based grounding on delete-relaxed reachability layers.
//
// Layer 0 treats every unknown atom as both possibly true and possibly
// false. An action is applicable at layer t if its positive preconditions
// are possibly true and its negative preconditions possibly false there.
// Atoms of static predicates (never in an effect, never unknown) are
// evaluated during grounding and do not become fluents.
//
// Ids are stable: ground_upto(k) equals ground_upto(0) extended k times.
// Each extension appends the actions first applicable at the new layer and
// the fluents they introduce, each batch sorted by name.

#include <cstddef>
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>
#include <vector>

#include "qbfplan/planning.hpp"

namespace qbfplan {

inline constexpr int kInfiniteBound = std::numeric_limits<int>::max();

class GroundingLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrounderOptions {
  std::size_t max_ground_actions = 200000;
};

struct ReachabilityLayer {
  std::set<std::string> possibly_true;
  std::set<std::string> surely_true;  // true in every relaxed world; the rest may be false
  std::vector<std::string> applicable;  // sorted action names
};

struct GroundDelta {
  std::vector<FluentId> fluents;
  std::vector<ActionId> actions;
  bool empty() const { return fluents.empty() && actions.empty(); }
};

class Grounder {
 public:
  explicit Grounder(const LiftedInstance& lifted, GrounderOptions options = {});
  ~Grounder();
  Grounder(Grounder&&) noexcept;
  Grounder& operator=(Grounder&&) noexcept;

  GroundInstance ground_upto(int k);
  // Extends `ground` (produced for length k) to cover k_next = k + 1.
  GroundDelta extend(GroundInstance& ground, int k_next);

  // First layer whose possible facts satisfy the goal, or kInfiniteBound.
  int lower_bound();
  // Layers 0..t, computed on demand.
  const ReachabilityLayer& layer(int t);
  int fixpoint_layer();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

GroundInstance ground_upto(const LiftedInstance& lifted, int k, const GrounderOptions& options = {});
GroundDelta extend_grounding(GroundInstance& ground, const LiftedInstance& lifted, int k_next,
                             const GrounderOptions& options = {});
int lower_bound(const LiftedInstance& lifted, const GrounderOptions& options = {});

}  // namespace qbfplan
