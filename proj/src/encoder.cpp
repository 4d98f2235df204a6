#include "qbfplan/encoder.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace qbfplan {

namespace {

constexpr int kActionBlock = 1;
constexpr int kStateBlock = 3;

}  // namespace

Var EncodingMap::action_var(ActionId a, int t) const {
  for (auto [id, v] : action_vars.at(static_cast<std::size_t>(t))) {
    if (id == a) return v;
  }
  throw std::out_of_range("action not encoded at step " + std::to_string(t));
}

Encoder::Encoder(EncodingTarget& target, const GroundInstance& ground)
    : target_(target), ground_(&ground) {
  names_.emplace_back();
}

Var Encoder::fresh(std::string name) {
  names_.push_back(std::move(name));
  return ++map_.max_var;
}

void Encoder::add(std::vector<Literal> clause) { target_.add_clause(clause); }

std::vector<ActionId> Encoder::actions_at(int t) const {
  std::vector<ActionId> ids;
  for (std::size_t i = 0; i < ground_->actions.size(); ++i) {
    if (ground_->actions[i].first_layer <= t) ids.push_back(static_cast<ActionId>(i));
  }
  return ids;
}

void Encoder::allocate_step_actions(int t, std::vector<Var>& out) {
  if (map_.action_vars.size() != static_cast<std::size_t>(t)) throw std::logic_error("steps out of order");
  std::vector<std::pair<ActionId, Var>> step;
  std::string at = "@" + std::to_string(t);
  Var noop = fresh("a:" + std::string(kNoop) + at);
  step.emplace_back(kNoopAction, noop);
  out.push_back(noop);
  for (ActionId a : actions_at(t)) {
    Var v = fresh("a:" + ground_->actions[a].name + at);
    step.emplace_back(a, v);
    out.push_back(v);
  }
  map_.action_vars.push_back(std::move(step));
}

void Encoder::allocate_states(FluentId f, int from, int to, std::vector<Var>& out) {
  if (map_.state_vars.size() <= f) map_.state_vars.resize(f + 1);
  auto& vars = map_.state_vars[f];
  for (int t = from; t <= to; ++t) {
    Var v = fresh("s:" + ground_->fluents[f] + "@" + std::to_string(t));
    vars.push_back(v);
    out.push_back(v);
  }
}

void Encoder::add_initial(FluentId f) {
  Literal s(map_.state_var(f, 0), false);
  auto unknown = map_.unknown_vars.find(f);
  if (unknown != map_.unknown_vars.end()) {
    Literal u(unknown->second, false);
    add({~u, s});
    add({u, ~s});
  } else if (std::find(ground_->init_true.begin(), ground_->init_true.end(), f) !=
             ground_->init_true.end()) {
    add({s});
  } else {
    add({~s});
  }
}

// Change of f between t and t + 1 needs an action at t causing it.
void Encoder::add_frame_axioms(FluentId f, int t) {
  Literal now(map_.state_var(f, t), false);
  Literal next(map_.state_var(f, t + 1), false);
  std::vector<Literal> becomes_true{now, ~next};
  std::vector<Literal> becomes_false{~now, next};
  for (auto [a, v] : map_.action_vars[static_cast<std::size_t>(t)]) {
    if (a == kNoopAction) continue;
    const GroundAction& action = ground_->actions[a];
    bool adds = std::find(action.add.begin(), action.add.end(), f) != action.add.end();
    bool dels = std::find(action.del.begin(), action.del.end(), f) != action.del.end();
    if (adds) becomes_true.emplace_back(v, false);
    if (dels && !adds) becomes_false.emplace_back(v, false);
  }
  add(std::move(becomes_true));
  add(std::move(becomes_false));
}

void Encoder::add_step(int t) {
  const auto& step = map_.action_vars[static_cast<std::size_t>(t)];
  std::vector<Literal> at_least_one;
  for (auto [a, v] : step) at_least_one.emplace_back(v, false);
  add(at_least_one);
  for (std::size_t i = 0; i < step.size(); ++i) {
    for (std::size_t j = i + 1; j < step.size(); ++j) {
      add({Literal(step[i].second, true), Literal(step[j].second, true)});
    }
  }
  for (auto [a, v] : step) {
    if (a == kNoopAction) continue;
    const GroundAction& action = ground_->actions[a];
    Literal not_a(v, true);
    for (auto l : action.precondition) add({not_a, Literal(map_.state_var(l.fluent, t), l.negated)});
    for (auto f : action.add) add({not_a, Literal(map_.state_var(f, t + 1), false)});
    for (auto f : action.del) {
      if (std::find(action.add.begin(), action.add.end(), f) != action.add.end()) continue;
      add({not_a, Literal(map_.state_var(f, t + 1), true)});
    }
  }
  for (FluentId f = 0; f < encoded_fluents_; ++f) add_frame_axioms(f, t);
}

void Encoder::add_goal() {
  map_.f1 = target_.push();
  for (const auto& clause : ground_->goal) {
    std::vector<Literal> lits;
    for (auto l : clause) lits.emplace_back(map_.state_var(l.fluent, map_.k), l.negated);
    add(std::move(lits));
  }
}

void Encoder::encode_initial(int k0) {
  if (initialised_) throw std::logic_error("encode_initial called twice");
  if (k0 < 0) throw std::invalid_argument("negative plan length");
  if (ground_->grounded_upto < k0) {
    throw EncodingError("ground instance covers length " + std::to_string(ground_->grounded_upto) +
                        " but " + std::to_string(k0) + " was requested");
  }
  for (const auto& clause : ground_->goal) {
    for (auto l : clause) {
      if (l.fluent >= ground_->fluents.size()) {
        throw EncodingError("goal references fluent " + std::to_string(l.fluent) +
                            " missing from the ground instance");
      }
    }
  }
  initialised_ = true;
  map_.k = k0;
  encoded_fluents_ = ground_->fluents.size();

  std::vector<Var> actions;
  for (int t = 0; t < k0; ++t) allocate_step_actions(t, actions);
  std::vector<Var> universals;
  for (FluentId f : ground_->init_unknown) {
    Var u = fresh("u:" + ground_->fluents[f]);
    map_.unknown_vars.emplace(f, u);
    universals.push_back(u);
  }
  std::vector<Var> states;
  map_.state_vars.assign(encoded_fluents_, {});
  for (int t = 0; t <= k0; ++t) {
    for (FluentId f = 0; f < encoded_fluents_; ++f) allocate_states(f, t, t, states);
  }
  target_.add_block(Quantifier::Exists, actions);
  target_.add_block(Quantifier::Forall, universals);
  target_.add_block(Quantifier::Exists, states);

  for (FluentId f = 0; f < encoded_fluents_; ++f) add_initial(f);
  for (int t = 0; t < k0; ++t) add_step(t);
  add_goal();
}

void Encoder::extend_to(const GroundInstance& ground, int k_next) {
  if (!initialised_ || !map_.f1) throw std::logic_error("extend_to without a live goal frame");
  if (k_next != map_.k + 1) throw std::invalid_argument("extend_to must advance by one step");
  if (ground.grounded_upto < k_next) {
    throw EncodingError("ground instance does not cover length " + std::to_string(k_next));
  }
  if (ground.fluents.size() < encoded_fluents_) throw EncodingError("ground instance shrank");
  ground_ = &ground;
  target_.pop();
  map_.f1.reset();
  int k = map_.k;

  // Fluents grounded since the last step get their whole history.
  std::size_t old_fluents = encoded_fluents_;
  std::vector<Var> states;
  for (FluentId f = static_cast<FluentId>(old_fluents); f < ground.fluents.size(); ++f) {
    allocate_states(f, 0, k, states);
  }
  std::vector<Var> actions;
  allocate_step_actions(k, actions);
  for (FluentId f = 0; f < ground.fluents.size(); ++f) allocate_states(f, k + 1, k + 1, states);
  for (Var v : actions) target_.add_variable_to_block(kActionBlock, v);
  for (Var v : states) target_.add_variable_to_block(kStateBlock, v);

  encoded_fluents_ = ground.fluents.size();
  for (FluentId f = static_cast<FluentId>(old_fluents); f < encoded_fluents_; ++f) {
    add_initial(f);
    for (int t = 0; t < k; ++t) add_frame_axioms(f, t);
  }
  add_step(k);
  map_.k = k_next;
  add_goal();
}

Plan Encoder::decode_plan(const Assignment& outer) const {
  Plan plan;
  for (int t = 0; t < map_.k; ++t) {
    std::optional<ActionId> chosen;
    for (auto [a, v] : map_.action_vars[static_cast<std::size_t>(t)]) {
      auto it = outer.find(v);
      if (it == outer.end()) throw std::logic_error("assignment misses action variable " + std::to_string(v));
      if (!it->second) continue;
      if (chosen) throw std::logic_error("several actions chosen at step " + std::to_string(t));
      chosen = a;
    }
    if (!chosen) throw std::logic_error("no action chosen at step " + std::to_string(t));
    plan.steps.push_back(*chosen == kNoopAction ? std::string(kNoop) : ground_->actions[*chosen].name);
  }
  return plan;
}

std::string Encoder::variable_name(Var v) const {
  if (v == 0 || v >= names_.size()) throw std::out_of_range("variable " + std::to_string(v) + " not encoded");
  return names_[v];
}

}  // namespace qbfplan
