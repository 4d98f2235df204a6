#include "qbfplan/grounder.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>

namespace qbfplan {

namespace {

struct Candidate {
  std::string name;
  std::vector<std::pair<std::string, bool>> pre;  // atom name, negated
  std::vector<std::string> add;
  std::vector<std::string> del;
  int first_layer = -1;
};

Atom instantiate(const SchemaAtom& atom, const std::map<std::string, std::string>& binding) {
  Atom a{atom.predicate, {}};
  for (const auto& term : atom.terms) {
    a.args.push_back(term[0] == '?' ? binding.at(term) : term);
  }
  return a;
}

}  // namespace

struct Grounder::Impl {
  LiftedInstance lifted;
  GrounderOptions options;
  std::set<std::string> static_predicates;
  std::set<std::string> static_facts;
  std::vector<Candidate> candidates;
  std::vector<ReachabilityLayer> layers;
  bool fixpoint = false;

  Impl(const LiftedInstance& l, GrounderOptions o) : lifted(l), options(o) {
    for (const auto& p : lifted.predicates) static_predicates.insert(p.name);
    for (const auto& a : lifted.actions) {
      for (const auto& e : a.add) static_predicates.erase(e.predicate);
      for (const auto& e : a.del) static_predicates.erase(e.predicate);
    }
    for (const auto& u : lifted.init_unknown) static_predicates.erase(u.predicate);
    for (const auto& a : lifted.init_true) {
      if (static_predicates.count(a.predicate)) static_facts.insert(a.name());
    }
    for (const auto& schema : lifted.actions) enumerate(schema);

    ReachabilityLayer first;
    for (const auto& a : lifted.init_true) {
      first.possibly_true.insert(a.name());
      first.surely_true.insert(a.name());
    }
    for (const auto& a : lifted.init_unknown) first.possibly_true.insert(a.name());
    layers.push_back(std::move(first));
    fill_applicable(0);
  }

  void enumerate(const ActionSchema& schema) {
    std::vector<std::vector<std::string>> domains;
    for (const auto& p : schema.parameters) domains.push_back(lifted.objects_of(p.type));
    // Static literals become checkable once their last parameter is bound.
    std::vector<std::vector<const SchemaLiteral*>> checks(schema.parameters.size() + 1);
    for (const auto& lit : schema.precondition) {
      if (!static_predicates.count(lit.atom.predicate)) continue;
      std::size_t last = 0;
      for (const auto& term : lit.atom.terms) {
        if (term[0] != '?') continue;
        for (std::size_t i = 0; i < schema.parameters.size(); ++i) {
          if (schema.parameters[i].name == term) last = std::max(last, i + 1);
        }
      }
      checks[last].push_back(&lit);
    }
    std::map<std::string, std::string> binding;
    auto statics_hold = [&](std::size_t bound) {
      for (const SchemaLiteral* lit : checks[bound]) {
        bool present = static_facts.count(instantiate(lit->atom, binding).name()) != 0;
        if (present == lit->negated) return false;
      }
      return true;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (!statics_hold(i)) return;
      if (i == schema.parameters.size()) {
        emit(schema, binding);
        return;
      }
      for (const auto& object : domains[i]) {
        binding[schema.parameters[i].name] = object;
        rec(i + 1);
      }
      binding.erase(schema.parameters[i].name);
    };
    rec(0);
  }

  void emit(const ActionSchema& schema, const std::map<std::string, std::string>& binding) {
    Candidate c;
    c.name = "(" + schema.name;
    for (const auto& p : schema.parameters) c.name += " " + binding.at(p.name);
    c.name += ")";
    for (const auto& lit : schema.precondition) {
      if (static_predicates.count(lit.atom.predicate)) continue;
      c.pre.emplace_back(instantiate(lit.atom, binding).name(), lit.negated);
    }
    for (const auto& e : schema.add) c.add.push_back(instantiate(e, binding).name());
    for (const auto& e : schema.del) c.del.push_back(instantiate(e, binding).name());
    // A delete of an atom the same action adds has no effect.
    std::erase_if(c.del, [&](const std::string& d) {
      return std::find(c.add.begin(), c.add.end(), d) != c.add.end();
    });
    candidates.push_back(std::move(c));
    if (candidates.size() > options.max_ground_actions) {
      throw GroundingLimitError("grounding exceeds " + std::to_string(options.max_ground_actions) +
                                " candidate actions");
    }
  }

  bool applicable(const Candidate& c, const ReachabilityLayer& layer) const {
    for (const auto& [atom, negated] : c.pre) {
      if (negated ? layer.surely_true.count(atom) != 0 : layer.possibly_true.count(atom) == 0) {
        return false;
      }
    }
    return true;
  }

  void fill_applicable(int t) {
    ReachabilityLayer& layer = layers[static_cast<std::size_t>(t)];
    for (auto& c : candidates) {
      if (c.first_layer < 0 && applicable(c, layer)) c.first_layer = t;
      if (c.first_layer >= 0) layer.applicable.push_back(c.name);
    }
    std::sort(layer.applicable.begin(), layer.applicable.end());
  }

  void ensure(int t) {
    while (!fixpoint && static_cast<int>(layers.size()) <= t) {
      const ReachabilityLayer& prev = layers.back();
      ReachabilityLayer next;
      next.possibly_true = prev.possibly_true;
      next.surely_true = prev.surely_true;
      for (const auto& c : candidates) {
        if (c.first_layer < 0) continue;
        next.possibly_true.insert(c.add.begin(), c.add.end());
        for (const auto& d : c.del) next.surely_true.erase(d);
      }
      layers.push_back(std::move(next));
      fill_applicable(static_cast<int>(layers.size()) - 1);
      const auto& a = layers[layers.size() - 2];
      const auto& b = layers.back();
      if (a.applicable == b.applicable && a.possibly_true == b.possibly_true &&
          a.surely_true == b.surely_true) {
        fixpoint = true;
      }
    }
  }

  const ReachabilityLayer& layer(int t) {
    ensure(t);
    return layers[std::min(static_cast<std::size_t>(t), layers.size() - 1)];
  }

  bool goal_possible(const ReachabilityLayer& layer) const {
    for (const auto& clause : lifted.goal) {
      bool possible = std::any_of(clause.begin(), clause.end(), [&](const GoalLiteral& l) {
        std::string name = l.atom.name();
        return l.negated ? layer.surely_true.count(name) == 0 : layer.possibly_true.count(name) != 0;
      });
      if (!possible) return false;
    }
    return true;
  }

  static FluentId intern(GroundInstance& g, std::map<std::string, FluentId>& ids, const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    FluentId id = static_cast<FluentId>(g.fluents.size());
    g.fluents.push_back(name);
    ids.emplace(name, id);
    return id;
  }

  GroundInstance initial() {
    GroundInstance g;
    std::set<std::string> names;
    for (const auto& a : lifted.init_true) {
      if (!static_predicates.count(a.predicate)) names.insert(a.name());
    }
    for (const auto& a : lifted.init_unknown) names.insert(a.name());
    for (const auto& clause : lifted.goal) {
      for (const auto& l : clause) names.insert(l.atom.name());
    }
    std::map<std::string, FluentId> ids;
    for (const auto& n : names) intern(g, ids, n);
    for (const auto& a : lifted.init_true) {
      if (auto it = ids.find(a.name()); it != ids.end()) g.init_true.push_back(it->second);
    }
    for (const auto& a : lifted.init_unknown) g.init_unknown.push_back(ids.at(a.name()));
    std::sort(g.init_true.begin(), g.init_true.end());
    std::sort(g.init_unknown.begin(), g.init_unknown.end());
    for (const auto& clause : lifted.goal) {
      std::vector<FluentLiteral> lits;
      for (const auto& l : clause) lits.push_back({ids.at(l.atom.name()), l.negated});
      g.goal.push_back(std::move(lits));
    }
    return g;
  }

  GroundDelta extend(GroundInstance& g, int k_next) {
    if (k_next != g.grounded_upto + 1) {
      throw std::invalid_argument("extend_grounding: expected length " +
                                  std::to_string(g.grounded_upto + 1) + ", got " +
                                  std::to_string(k_next));
    }
    int t = k_next - 1;
    ensure(t);
    std::vector<const Candidate*> fresh;
    for (const auto& c : candidates) {
      if (c.first_layer == t) fresh.push_back(&c);
    }
    std::sort(fresh.begin(), fresh.end(),
              [](const Candidate* a, const Candidate* b) { return a->name < b->name; });
    std::map<std::string, FluentId> ids;
    for (std::size_t i = 0; i < g.fluents.size(); ++i) ids.emplace(g.fluents[i], static_cast<FluentId>(i));
    std::set<std::string> new_names;
    for (const Candidate* c : fresh) {
      for (const auto& [atom, negated] : c->pre) new_names.insert(atom);
      new_names.insert(c->add.begin(), c->add.end());
      new_names.insert(c->del.begin(), c->del.end());
    }
    GroundDelta delta;
    for (const auto& n : new_names) {
      if (ids.count(n)) continue;
      delta.fluents.push_back(intern(g, ids, n));
    }
    for (const Candidate* c : fresh) {
      GroundAction a;
      a.name = c->name;
      a.first_layer = c->first_layer;
      for (const auto& [atom, negated] : c->pre) a.precondition.push_back({ids.at(atom), negated});
      for (const auto& n : c->add) a.add.push_back(ids.at(n));
      for (const auto& n : c->del) a.del.push_back(ids.at(n));
      delta.actions.push_back(static_cast<ActionId>(g.actions.size()));
      g.actions.push_back(std::move(a));
    }
    if (g.actions.size() > options.max_ground_actions) {
      throw GroundingLimitError("grounding exceeds " + std::to_string(options.max_ground_actions) +
                                " ground actions");
    }
    g.grounded_upto = k_next;
    return delta;
  }
};

Grounder::Grounder(const LiftedInstance& lifted, GrounderOptions options)
    : impl_(std::make_unique<Impl>(lifted, options)) {}
Grounder::~Grounder() = default;
Grounder::Grounder(Grounder&&) noexcept = default;
Grounder& Grounder::operator=(Grounder&&) noexcept = default;

GroundInstance Grounder::ground_upto(int k) {
  if (k < 0) throw std::invalid_argument("ground_upto: negative length");
  GroundInstance g = impl_->initial();
  for (int i = 1; i <= k; ++i) impl_->extend(g, i);
  return g;
}

GroundDelta Grounder::extend(GroundInstance& ground, int k_next) { return impl_->extend(ground, k_next); }

int Grounder::lower_bound() {
  for (int t = 0;; ++t) {
    const ReachabilityLayer& l = impl_->layer(t);
    if (impl_->goal_possible(l)) return t;
    if (impl_->fixpoint && static_cast<std::size_t>(t) + 1 >= impl_->layers.size()) return kInfiniteBound;
  }
}

const ReachabilityLayer& Grounder::layer(int t) { return impl_->layer(t); }

int Grounder::fixpoint_layer() {
  for (int t = 0; !impl_->fixpoint; ++t) impl_->ensure(t);
  return static_cast<int>(impl_->layers.size()) - 2;
}

GroundInstance ground_upto(const LiftedInstance& lifted, int k, const GrounderOptions& options) {
  return Grounder(lifted, options).ground_upto(k);
}

GroundDelta extend_grounding(GroundInstance& ground, const LiftedInstance& lifted, int k_next,
                             const GrounderOptions& options) {
  return Grounder(lifted, options).extend(ground, k_next);
}

int lower_bound(const LiftedInstance& lifted, const GrounderOptions& options) {
  return Grounder(lifted, options).lower_bound();
}

}  // namespace qbfplan
