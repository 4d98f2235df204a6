#include "qbfplan/planning.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace qbfplan {

namespace {

// --- s-expressions ----------------------------------------------------------

struct Node {
  bool list = false;
  std::string text;  // lower-cased symbol
  std::vector<Node> items;
  int line = 1;
  int column = 1;

  bool is(std::string_view symbol) const { return !list && text == symbol; }
  bool head_is(std::string_view symbol) const {
    return list && !items.empty() && items.front().is(symbol);
  }
};

class Reader {
 public:
  Reader(std::string source, std::string_view text) : source_(std::move(source)), text_(text) {}

  Node read_document() {
    skip_space();
    if (pos_ >= text_.size()) fail(line_, column_, "empty input");
    Node root = read();
    skip_space();
    if (pos_ < text_.size()) fail(line_, column_, "unexpected text after closing parenthesis");
    return root;
  }

  [[noreturn]] void fail(int line, int column, const std::string& what) const {
    throw PddlError(source_, line, column, what);
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Node read() {
    skip_space();
    Node node;
    node.line = line_;
    node.column = column_;
    if (pos_ >= text_.size()) fail(line_, column_, "unexpected end of input");
    char c = text_[pos_];
    if (c == ')') fail(line_, column_, "unexpected ')'");
    if (c == '(') {
      node.list = true;
      advance();
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) fail(node.line, node.column, "unbalanced '('");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    while (pos_ < text_.size()) {
      c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      node.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      advance();
    }
    return node;
  }

  std::string source_;
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// --- fragment parser --------------------------------------------------------

const std::set<std::string> kSupportedRequirements = {":strips", ":typing",
                                                      ":negative-preconditions"};

class Parser {
 public:
  explicit Parser(LiftedInstance& out) : out_(out) {}

  void domain(std::string_view text) {
    Reader reader("domain", text);
    reader_ = &reader;
    Node root = reader.read_document();
    expect_head(root, "define", "domain file must start with (define");
    const auto& items = root.items;
    if (items.size() < 2 || !items[1].head_is("domain") || items[1].items.size() != 2) {
      fail(root, "expected (domain <name>)");
    }
    out_.domain_name = symbol(items[1].items[1], "domain name");
    out_.types["object"] = "object";
    std::vector<const Node*> actions;
    for (std::size_t i = 2; i < items.size(); ++i) {
      const Node& section = items[i];
      if (!section.list || section.items.empty()) fail(section, "expected a domain section");
      const std::string& head = section.items.front().text;
      if (head == ":requirements") {
        requirements(section);
      } else if (head == ":types") {
        types(section);
      } else if (head == ":constants") {
        for (auto& [name, type] : typed_list(section, 1, false)) add_object(section, name, type);
      } else if (head == ":predicates") {
        predicates(section);
      } else if (head == ":action") {
        actions.push_back(&section);
      } else {
        fail(section.items.front(), "unsupported domain section " + head);
      }
    }
    for (const Node* a : actions) action(*a);
  }

  void problem(std::string_view text) {
    Reader reader("problem", text);
    reader_ = &reader;
    Node root = reader.read_document();
    expect_head(root, "define", "problem file must start with (define");
    const auto& items = root.items;
    if (items.size() < 2 || !items[1].head_is("problem") || items[1].items.size() != 2) {
      fail(root, "expected (problem <name>)");
    }
    out_.problem_name = symbol(items[1].items[1], "problem name");
    bool have_goal = false;
    std::vector<const Node*> deferred;
    for (std::size_t i = 2; i < items.size(); ++i) {
      const Node& section = items[i];
      if (!section.list || section.items.empty()) fail(section, "expected a problem section");
      const std::string& head = section.items.front().text;
      if (head == ":domain") {
        if (section.items.size() != 2 || symbol(section.items[1], "domain name") != out_.domain_name) {
          fail(section, "problem refers to a different domain");
        }
      } else if (head == ":requirements") {
        requirements(section);
      } else if (head == ":objects") {
        for (auto& [name, type] : typed_list(section, 1, false)) add_object(section, name, type);
      } else if (head == ":init" || head == ":goal") {
        deferred.push_back(&section);
        have_goal = have_goal || head == ":goal";
      } else {
        fail(section.items.front(), "unsupported problem section " + head);
      }
    }
    if (!have_goal) fail(root, "problem has no :goal");
    for (const Node* section : deferred) {
      if (section->items.front().text == ":init") {
        init(*section);
      } else {
        goal(*section);
      }
    }
  }

 private:
  [[noreturn]] void fail(const Node& at, const std::string& what) const {
    reader_->fail(at.line, at.column, what);
  }

  void expect_head(const Node& node, std::string_view head, const std::string& what) const {
    if (!node.head_is(head)) fail(node, what);
  }

  std::string symbol(const Node& node, const std::string& what) const {
    if (node.list || node.text.empty()) fail(node, "expected " + what);
    return node.text;
  }

  void requirements(const Node& section) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      std::string r = symbol(section.items[i], "requirement flag");
      if (!kSupportedRequirements.count(r)) fail(section.items[i], "unsupported requirement " + r);
      if (std::find(out_.requirements.begin(), out_.requirements.end(), r) == out_.requirements.end()) {
        out_.requirements.push_back(r);
      }
    }
  }

  bool has_requirement(std::string_view r) const {
    return std::find(out_.requirements.begin(), out_.requirements.end(), r) != out_.requirements.end();
  }

  // "a b - t c" style list; names without a type get "object".
  std::vector<std::pair<std::string, std::string>> typed_list(const Node& list, std::size_t start,
                                                              bool variables) {
    std::vector<std::pair<std::string, std::string>> result;
    std::vector<std::string> pending;
    const auto& items = list.items;
    for (std::size_t i = start; i < items.size(); ++i) {
      const Node& item = items[i];
      if (item.list) fail(item, item.head_is("either") ? "unsupported type (either ...)" : "expected a name");
      if (item.text == "-") {
        if (i + 1 >= items.size()) fail(item, "missing type after '-'");
        if (!has_requirement(":typing")) fail(item, "typed list requires :typing");
        const Node& type_node = items[++i];
        if (type_node.list) fail(type_node, "unsupported type (either ...)");
        std::string type = type_node.text;
        if (!out_.types.count(type)) fail(type_node, "unknown type " + type);
        if (pending.empty()) fail(item, "'-' without preceding names");
        for (auto& name : pending) result.emplace_back(std::move(name), type);
        pending.clear();
        continue;
      }
      if (variables != (item.text[0] == '?')) {
        fail(item, variables ? "expected a variable" : "unexpected variable " + item.text);
      }
      pending.push_back(item.text);
    }
    for (auto& name : pending) result.emplace_back(std::move(name), "object");
    return result;
  }

  void types(const Node& section) {
    if (!has_requirement(":typing")) fail(section, ":types requires :typing");
    std::vector<std::pair<const Node*, std::string>> declared;
    std::vector<const Node*> pending;
    const auto& items = section.items;
    for (std::size_t i = 1; i < items.size(); ++i) {
      const Node& item = items[i];
      if (item.list) fail(item, "unsupported type (either ...)");
      if (item.text == "-") {
        if (i + 1 >= items.size() || items[i + 1].list) fail(item, "missing type after '-'");
        if (pending.empty()) fail(item, "'-' without preceding names");
        for (const Node* n : pending) declared.emplace_back(n, items[i + 1].text);
        pending.clear();
        ++i;
        continue;
      }
      pending.push_back(&item);
    }
    for (const Node* n : pending) declared.emplace_back(n, "object");
    for (auto& [node, parent] : declared) {
      if (node->text == "object") fail(*node, "type object cannot be redeclared");
      out_.types[node->text] = parent;
    }
    for (auto& [node, parent] : declared) {
      if (!out_.types.count(parent)) fail(*node, "unknown type " + parent);
      std::string t = node->text;
      for (std::size_t steps = 0; t != "object"; ++steps) {
        if (steps > out_.types.size()) fail(*node, "cyclic type hierarchy at " + node->text);
        t = out_.types[t];
      }
    }
  }

  void add_object(const Node& at, const std::string& name, const std::string& type) {
    auto [it, inserted] = out_.objects.emplace(name, type);
    if (!inserted && it->second != type) fail(at, "object " + name + " declared with two types");
  }

  void predicates(const Node& section) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const Node& p = section.items[i];
      if (!p.list || p.items.empty()) fail(p, "expected a predicate declaration");
      PredicateSchema schema;
      schema.name = symbol(p.items[0], "predicate name");
      if (out_.predicate(schema.name)) fail(p, "predicate " + schema.name + " declared twice");
      for (auto& [name, type] : typed_list(p, 1, true)) schema.parameters.push_back({name, type});
      out_.predicates.push_back(std::move(schema));
    }
  }

  SchemaAtom schema_atom(const Node& node, const std::vector<TypedName>& params) {
    if (!node.list || node.items.empty()) fail(node, "expected an atom");
    if (node.items[0].is("=")) fail(node, "unsupported equality atom");
    SchemaAtom atom;
    atom.predicate = symbol(node.items[0], "predicate name");
    const PredicateSchema* p = out_.predicate(atom.predicate);
    if (!p) fail(node.items[0], "unknown predicate " + atom.predicate);
    if (p->parameters.size() + 1 != node.items.size()) {
      fail(node, "predicate " + atom.predicate + " expects " + std::to_string(p->parameters.size()) +
                     " arguments");
    }
    for (std::size_t i = 1; i < node.items.size(); ++i) {
      std::string term = symbol(node.items[i], "term");
      std::string type;
      if (term[0] == '?') {
        auto it = std::find_if(params.begin(), params.end(),
                               [&](const TypedName& t) { return t.name == term; });
        if (it == params.end()) fail(node.items[i], "unbound variable " + term);
        type = it->type;
      } else {
        auto it = out_.objects.find(term);
        if (it == out_.objects.end()) fail(node.items[i], "unknown constant " + term);
        type = it->second;
      }
      const std::string& expected = p->parameters[i - 1].type;
      if (!out_.is_subtype(type, expected) && !out_.is_subtype(expected, type)) {
        fail(node.items[i], "type mismatch for " + term + " in " + atom.predicate);
      }
      atom.terms.push_back(std::move(term));
    }
    return atom;
  }

  std::vector<SchemaLiteral> condition(const Node& node, const std::vector<TypedName>& params) {
    std::vector<SchemaLiteral> result;
    if (!node.list) fail(node, "expected a condition");
    if (node.items.empty()) return result;
    if (node.head_is("and")) {
      for (std::size_t i = 1; i < node.items.size(); ++i) {
        auto part = condition(node.items[i], params);
        result.insert(result.end(), part.begin(), part.end());
      }
      return result;
    }
    if (node.head_is("not")) {
      if (node.items.size() != 2) fail(node, "(not ...) takes one atom");
      if (!has_requirement(":negative-preconditions")) {
        fail(node, "negative precondition requires :negative-preconditions");
      }
      result.push_back({schema_atom(node.items[1], params), true});
      return result;
    }
    const std::string& head = node.items[0].text;
    if (head == "or" || head == "imply" || head == "exists" || head == "forall" || head == "when") {
      fail(node, "unsupported condition (" + head + " ...)");
    }
    result.push_back({schema_atom(node, params), false});
    return result;
  }

  void effect(const Node& node, const std::vector<TypedName>& params, ActionSchema& a) {
    if (!node.list) fail(node, "expected an effect");
    if (node.items.empty()) return;
    if (node.head_is("and")) {
      for (std::size_t i = 1; i < node.items.size(); ++i) effect(node.items[i], params, a);
      return;
    }
    if (node.head_is("not")) {
      if (node.items.size() != 2) fail(node, "(not ...) takes one atom");
      a.del.push_back(schema_atom(node.items[1], params));
      return;
    }
    const std::string& head = node.items[0].text;
    if (head == "when" || head == "forall" || head == "increase" || head == "decrease" ||
        head == "assign") {
      fail(node, "unsupported effect (" + head + " ...)");
    }
    a.add.push_back(schema_atom(node, params));
  }

  void action(const Node& node) {
    ActionSchema a;
    if (node.items.size() < 2) fail(node, "action without a name");
    a.name = symbol(node.items[1], "action name");
    if (a.name == kNoop) fail(node.items[1], "action name noop is reserved");
    for (const auto& other : out_.actions) {
      if (other.name == a.name) fail(node.items[1], "action " + a.name + " declared twice");
    }
    const Node* pre = nullptr;
    const Node* eff = nullptr;
    for (std::size_t i = 2; i < node.items.size(); i += 2) {
      const Node& key = node.items[i];
      if (i + 1 >= node.items.size()) fail(key, "missing value for " + key.text);
      const Node& value = node.items[i + 1];
      if (key.is(":parameters")) {
        if (!value.list) fail(value, "expected a parameter list");
        for (auto& [name, type] : typed_list(value, 0, true)) a.parameters.push_back({name, type});
      } else if (key.is(":precondition")) {
        pre = &value;
      } else if (key.is(":effect")) {
        eff = &value;
      } else {
        fail(key, "unsupported action field " + key.text);
      }
    }
    if (pre) a.precondition = condition(*pre, a.parameters);
    if (eff) effect(*eff, a.parameters, a);
    out_.actions.push_back(std::move(a));
  }

  Atom ground_atom(const Node& node) {
    SchemaAtom s = schema_atom(node, {});
    return Atom{std::move(s.predicate), std::move(s.terms)};
  }

  void init(const Node& section) {
    std::set<Atom> seen_true;
    std::set<Atom> seen_unknown;
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const Node& item = section.items[i];
      if (item.head_is("unknown")) {
        if (item.items.size() != 2) fail(item, "(unknown ...) takes one atom");
        Atom a = ground_atom(item.items[1]);
        if (seen_true.count(a)) fail(item, a.name() + " is both true and unknown");
        if (seen_unknown.insert(a).second) out_.init_unknown.push_back(std::move(a));
      } else if (item.head_is("not")) {
        fail(item, "negative literals are implicit in :init");
      } else if (item.head_is("=")) {
        fail(item, "unsupported numeric fluent");
      } else {
        Atom a = ground_atom(item);
        if (seen_unknown.count(a)) fail(item, a.name() + " is both true and unknown");
        if (seen_true.insert(a).second) out_.init_true.push_back(std::move(a));
      }
    }
  }

  GoalLiteral goal_literal(const Node& node) {
    if (node.head_is("not")) {
      if (node.items.size() != 2) fail(node, "(not ...) takes one atom");
      return {ground_atom(node.items[1]), true};
    }
    if (node.list && !node.items.empty() && !node.items[0].list) {
      const std::string& head = node.items[0].text;
      if (head == "and" || head == "or" || head == "imply" || head == "exists" || head == "forall") {
        fail(node, "goal must be a CNF: unexpected (" + head + " ...)");
      }
    }
    return {ground_atom(node), false};
  }

  GoalClause goal_clause(const Node& node) {
    GoalClause clause;
    if (node.head_is("or")) {
      for (std::size_t i = 1; i < node.items.size(); ++i) clause.push_back(goal_literal(node.items[i]));
    } else {
      clause.push_back(goal_literal(node));
    }
    return clause;
  }

  void goal(const Node& section) {
    if (section.items.size() != 2) fail(section, ":goal takes one formula");
    const Node& g = section.items[1];
    if (!g.list) fail(g, "expected a goal formula");
    if (g.items.empty()) return;
    if (g.head_is("and")) {
      for (std::size_t i = 1; i < g.items.size(); ++i) out_.goal.push_back(goal_clause(g.items[i]));
    } else {
      out_.goal.push_back(goal_clause(g));
    }
  }

  LiftedInstance& out_;
  Reader* reader_ = nullptr;
};

}  // namespace

std::string Atom::name() const {
  std::string s = "(" + predicate;
  for (const auto& a : args) s += " " + a;
  return s + ")";
}

const PredicateSchema* LiftedInstance::predicate(std::string_view name) const {
  for (const auto& p : predicates) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool LiftedInstance::is_subtype(const std::string& type, const std::string& ancestor) const {
  std::string t = type;
  for (std::size_t steps = 0; steps <= types.size(); ++steps) {
    if (t == ancestor) return true;
    if (t == "object") return false;
    auto it = types.find(t);
    if (it == types.end()) return false;
    t = it->second;
  }
  return false;
}

std::vector<std::string> LiftedInstance::objects_of(const std::string& type) const {
  std::vector<std::string> result;
  for (const auto& [name, t] : objects) {
    if (is_subtype(t, type)) result.push_back(name);
  }
  return result;
}

LiftedInstance parse_pddl(std::string_view domain_text, std::string_view problem_text) {
  LiftedInstance instance;
  Parser parser(instance);
  parser.domain(domain_text);
  parser.problem(problem_text);
  return instance;
}

// --- ground model -----------------------------------------------------------

std::optional<FluentId> GroundInstance::find_fluent(std::string_view name) const {
  for (std::size_t i = 0; i < fluents.size(); ++i) {
    if (fluents[i] == name) return static_cast<FluentId>(i);
  }
  return std::nullopt;
}

std::optional<ActionId> GroundInstance::find_action(std::string_view name) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == name) return static_cast<ActionId>(i);
  }
  return std::nullopt;
}

namespace {

std::string literal_name(const GroundInstance& g, FluentLiteral l) {
  return l.negated ? "(not " + g.fluents[l.fluent] + ")" : g.fluents[l.fluent];
}

}  // namespace

std::string write_ground(const GroundInstance& g) {
  std::ostringstream out;
  out << "grounded-upto " << g.grounded_upto << "\n";
  for (std::size_t i = 0; i < g.fluents.size(); ++i) out << "fluent " << i << " " << g.fluents[i] << "\n";
  for (std::size_t i = 0; i < g.actions.size(); ++i) {
    const auto& a = g.actions[i];
    out << "action " << i << " " << a.name << " layer " << a.first_layer << "\n";
    for (auto l : a.precondition) out << "  pre " << literal_name(g, l) << "\n";
    for (auto f : a.add) out << "  add " << g.fluents[f] << "\n";
    for (auto f : a.del) out << "  del " << g.fluents[f] << "\n";
  }
  for (auto f : g.init_true) out << "init " << g.fluents[f] << "\n";
  for (auto f : g.init_unknown) out << "unknown " << g.fluents[f] << "\n";
  for (const auto& clause : g.goal) {
    out << "goal";
    for (auto l : clause) out << " " << literal_name(g, l);
    out << "\n";
  }
  return out.str();
}

std::string to_string(const Plan& plan) {
  std::string s;
  for (std::size_t t = 0; t < plan.steps.size(); ++t) {
    s += std::to_string(t) + ": " + plan.steps[t] + "\n";
  }
  return s;
}

namespace {

struct ResolvedPlan {
  std::vector<std::optional<ActionId>> steps;  // nullopt for noop
};

ResolvedPlan resolve(const GroundInstance& ground, const Plan& plan) {
  std::map<std::string_view, ActionId> by_name;
  for (std::size_t i = 0; i < ground.actions.size(); ++i) {
    by_name.emplace(ground.actions[i].name, static_cast<ActionId>(i));
  }
  ResolvedPlan r;
  for (const auto& step : plan.steps) {
    if (step == kNoop) {
      r.steps.push_back(std::nullopt);
      continue;
    }
    auto it = by_name.find(step);
    if (it == by_name.end()) throw std::invalid_argument("plan uses unknown action " + step);
    r.steps.push_back(it->second);
  }
  return r;
}

bool holds(const std::vector<char>& state, FluentLiteral l) {
  return (state[l.fluent] != 0) != l.negated;
}

std::optional<PlanFailure> run(const GroundInstance& ground, const ResolvedPlan& plan,
                               const std::map<FluentId, bool>& completion) {
  std::vector<char> state(ground.fluents.size(), 0);
  for (auto f : ground.init_true) state[f] = 1;
  for (auto [f, value] : completion) state[f] = value ? 1 : 0;
  for (std::size_t t = 0; t < plan.steps.size(); ++t) {
    if (!plan.steps[t]) continue;
    const GroundAction& a = ground.actions[*plan.steps[t]];
    for (auto l : a.precondition) {
      if (!holds(state, l)) return PlanFailure{completion, t, FailureReason::Precondition};
    }
    for (auto f : a.del) state[f] = 0;
    for (auto f : a.add) state[f] = 1;
  }
  for (const auto& clause : ground.goal) {
    bool sat = std::any_of(clause.begin(), clause.end(), [&](FluentLiteral l) { return holds(state, l); });
    if (!sat) return PlanFailure{completion, plan.steps.size(), FailureReason::Goal};
  }
  return std::nullopt;
}

}  // namespace

std::optional<PlanFailure> simulate(const GroundInstance& ground, const Plan& plan,
                                    const std::map<FluentId, bool>& completion) {
  return run(ground, resolve(ground, plan), completion);
}

VerifyResult verify_plan(const GroundInstance& ground, const Plan& plan, const VerifyOptions& options) {
  const auto& unknown = ground.init_unknown;
  if (unknown.size() > options.unknown_cap) {
    throw std::invalid_argument("verify_plan: " + std::to_string(unknown.size()) +
                                " unknowns exceed the enumeration cap " +
                                std::to_string(options.unknown_cap));
  }
  ResolvedPlan resolved = resolve(ground, plan);
  VerifyResult result;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << unknown.size()); ++mask) {
    std::map<FluentId, bool> completion;
    for (std::size_t i = 0; i < unknown.size(); ++i) completion[unknown[i]] = ((mask >> i) & 1u) != 0;
    if (auto failure = run(ground, resolved, completion)) {
      result.failure = std::move(failure);
      break;
    }
  }
  return result;
}

}  // namespace qbfplan
