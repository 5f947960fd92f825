#pragma once

// PDDL reader and printer for the STRIPS+typing subset: domains, problems and
// VAL-style plan files.

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pddl_instruct/core.hpp"
#include "pddl_instruct/sexpr.hpp"

namespace pddl_instruct {

inline const std::set<std::string, std::less<>>& supported_requirements() {
  static const std::set<std::string, std::less<>> flags{":strips", ":typing"};
  return flags;
}

namespace detail {

[[noreturn]] inline void fail(const SExpr& at, const std::string& message, std::string expected = {}) {
  throw ParseError(message, at.span, std::move(expected));
}

inline const std::string& expect_token(const SExpr& e, std::string_view what) {
  if (!e.is_token()) fail(e, "expected " + std::string(what), std::string(what));
  return e.token;
}

inline void expect_list(const SExpr& e, std::string_view what) {
  if (!e.is_list) fail(e, "expected " + std::string(what), std::string(what));
}

/// "a b - t c" style typed lists. Untyped names default to "object".
inline std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t from,
                                               bool variables) {
  std::vector<TypedName> out;
  std::size_t pending_from = 0;
  for (std::size_t i = from; i < items.size(); ++i) {
    const SExpr& item = items[i];
    if (item.is_list) {
      if (item.has_head("either")) throw UnsupportedFeature("either types", item.span);
      fail(item, "unexpected list in typed list", "name");
    }
    if (item.token == "-") {
      if (i + 1 >= items.size()) fail(item, "missing type after '-'", "type name");
      const SExpr& type = items[i + 1];
      if (type.has_head("either")) throw UnsupportedFeature("either types", type.span);
      expect_token(type, "type name");
      if (pending_from == out.size()) fail(item, "type without names", "name");
      for (std::size_t k = pending_from; k < out.size(); ++k) out[k].type = type.token;
      pending_from = out.size();
      ++i;
      continue;
    }
    if (variables != is_variable(item.token)) {
      fail(item, variables ? "expected variable, got '" + item.token + "'" : "unexpected variable '" + item.token + "'",
           variables ? "?variable" : "name");
    }
    out.push_back(TypedName{item.token, std::string(kRootType)});
  }
  return out;
}

inline void check_requirements(const SExpr& section) {
  for (std::size_t i = 1; i < section.items.size(); ++i) {
    const std::string& flag = expect_token(section.items[i], "requirement flag");
    if (supported_requirements().count(flag) == 0) {
      throw UnsupportedFeature("requirement " + flag, section.items[i].span);
    }
  }
}

inline void reject_formula_head(const SExpr& e) {
  static const std::vector<std::pair<std::string_view, std::string_view>> unsupported{
      {"not", "negative preconditions"},
      {"=", "equality preconditions"},
      {"or", "disjunctive preconditions"},
      {"imply", "disjunctive preconditions"},
      {"exists", "existential preconditions"},
      {"forall", "universal preconditions"},
      {"when", "conditional effects"},
      {"increase", "numeric fluents"},
      {"decrease", "numeric fluents"},
      {"assign", "numeric fluents"},
      {"scale-up", "numeric fluents"},
      {"scale-down", "numeric fluents"},
      {"<", "numeric fluents"},
      {">", "numeric fluents"},
      {"<=", "numeric fluents"},
      {">=", "numeric fluents"},
  };
  if (!e.is_list || e.items.empty() || !e.items.front().is_token()) return;
  for (const auto& [head, feature] : unsupported) {
    if (e.items.front().token == head) throw UnsupportedFeature(std::string(feature), e.span);
  }
}

inline Atom parse_atom_expr(const SExpr& e) {
  expect_list(e, "atom");
  if (e.items.empty()) fail(e, "empty atom", "predicate name");
  Atom atom;
  atom.predicate = expect_token(e.items.front(), "predicate name");
  for (std::size_t i = 1; i < e.items.size(); ++i) atom.args.push_back(expect_token(e.items[i], "argument"));
  return atom;
}

class DomainReader {
 public:
  Domain read(const SExpr& root) {
    if (!root.has_head("define")) fail(root, "expected (define ...)", "(define");
    if (root.items.size() < 2 || !root.items[1].has_head("domain") || root.items[1].items.size() != 2) {
      fail(root, "expected (domain <name>)", "(domain");
    }
    domain_.name = expect_token(root.items[1].items[1], "domain name");
    for (std::size_t i = 2; i < root.items.size(); ++i) section(root.items[i]);
    return std::move(domain_);
  }

 private:
  void section(const SExpr& s) {
    expect_list(s, "domain section");
    if (s.items.empty()) fail(s, "empty section", ":predicates");
    const std::string& head = expect_token(s.items.front(), "section keyword");
    if (head == ":requirements") {
      check_requirements(s);
    } else if (head == ":types") {
      types(s);
    } else if (head == ":predicates") {
      predicates(s);
    } else if (head == ":action") {
      action(s);
    } else if (head == ":constants") {
      throw UnsupportedFeature("domain constants", s.span);
    } else if (head == ":functions") {
      throw UnsupportedFeature("numeric fluents", s.span);
    } else if (head == ":derived") {
      throw UnsupportedFeature("derived predicates", s.span);
    } else if (head == ":durative-action") {
      throw UnsupportedFeature("durative actions", s.span);
    } else if (head == ":constraints") {
      throw UnsupportedFeature("constraints", s.span);
    } else {
      fail(s.items.front(), "unknown domain section '" + head + "'", ":action");
    }
  }

  void types(const SExpr& s) {
    for (auto& t : parse_typed_list(s.items, 1, false)) {
      if (t.name == kRootType) continue;
      if (domain_.has_type(t.name)) fail(s, "duplicate type '" + t.name + "'");
      domain_.types.push_back(TypeDecl{t.name, t.type});
    }
    for (const auto& t : domain_.types) {
      if (!domain_.has_type(t.parent)) throw UnknownType(describe(s.span) + ": unknown parent type '" + t.parent + "'");
    }
  }

  void require_type(const SExpr& at, const std::string& type) const {
    if (!domain_.has_type(type)) throw UnknownType(describe(at.span) + ": unknown type '" + type + "'");
  }

  void predicates(const SExpr& s) {
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      const SExpr& decl = s.items[i];
      expect_list(decl, "predicate declaration");
      if (decl.items.empty()) fail(decl, "empty predicate declaration", "predicate name");
      PredicateDecl pred;
      pred.name = expect_token(decl.items.front(), "predicate name");
      if (domain_.find_predicate(pred.name) != nullptr) fail(decl, "duplicate predicate '" + pred.name + "'");
      for (const auto& param : parse_typed_list(decl.items, 1, true)) {
        require_type(decl, param.type);
        pred.param_types.push_back(param.type);
      }
      domain_.predicates.push_back(std::move(pred));
    }
  }

  void action(const SExpr& s) {
    if (s.items.size() < 2) fail(s, "missing action name", "action name");
    ActionSchema schema;
    schema.name = expect_token(s.items[1], "action name");
    if (domain_.find_action(schema.name) != nullptr) fail(s, "duplicate action '" + schema.name + "'");
    for (std::size_t i = 2; i < s.items.size(); i += 2) {
      const std::string& key = expect_token(s.items[i], "action keyword");
      if (i + 1 >= s.items.size()) fail(s.items[i], "missing value for " + key);
      const SExpr& value = s.items[i + 1];
      if (key == ":parameters") {
        expect_list(value, "parameter list");
        schema.params = parse_typed_list(value.items, 0, true);
        for (const auto& p : schema.params) require_type(value, p.type);
      } else if (key == ":precondition") {
        precondition(value, schema);
      } else if (key == ":effect") {
        effect(value, schema);
      } else {
        fail(s.items[i], "unknown action keyword '" + key + "'", ":effect");
      }
    }
    domain_.actions.push_back(std::move(schema));
  }

  Atom lifted_atom(const SExpr& e, const ActionSchema& schema) const {
    Atom atom = parse_atom_expr(e);
    const PredicateDecl* decl = domain_.find_predicate(atom.predicate);
    if (decl == nullptr) throw UnknownPredicate(describe(e.span) + ": unknown predicate '" + atom.predicate + "'");
    if (decl->arity() != atom.arity()) {
      throw ArityMismatch(describe(e.span) + ": predicate " + atom.predicate + " expects " +
                          std::to_string(decl->arity()) + " argument(s), got " + std::to_string(atom.arity()));
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const std::string& term = atom.args[i];
      if (!is_variable(term)) throw UnsupportedFeature("constant '" + term + "' in action schema", e.span);
      auto it = std::find_if(schema.params.begin(), schema.params.end(),
                             [&](const TypedName& p) { return p.name == term; });
      if (it == schema.params.end()) fail(e, "variable " + term + " is not a parameter of " + schema.name);
      if (!domain_.is_subtype(it->type, decl->param_types[i])) {
        throw TypeMismatch(describe(e.span) + ": " + term + " - " + it->type + " does not match argument " +
                           std::to_string(i + 1) + " of " + atom.predicate + " (" + decl->param_types[i] + ")");
      }
    }
    return atom;
  }

  void precondition(const SExpr& f, ActionSchema& schema) const {
    if (f.is_list && f.items.empty()) return;
    reject_formula_head(f);
    if (f.has_head("and")) {
      for (std::size_t i = 1; i < f.items.size(); ++i) precondition(f.items[i], schema);
      return;
    }
    schema.pre.push_back(lifted_atom(f, schema));
  }

  void effect(const SExpr& f, ActionSchema& schema) const {
    if (f.is_list && f.items.empty()) return;
    if (f.has_head("and")) {
      for (std::size_t i = 1; i < f.items.size(); ++i) effect(f.items[i], schema);
      return;
    }
    if (f.has_head("not")) {
      if (f.items.size() != 2) fail(f, "malformed (not ...) effect");
      reject_formula_head(f.items[1]);
      schema.del.push_back(lifted_atom(f.items[1], schema));
      return;
    }
    reject_formula_head(f);
    schema.add.push_back(lifted_atom(f, schema));
  }

  Domain domain_;
};

inline const SExpr& single_root(const std::vector<SExpr>& roots, std::string_view what) {
  if (roots.empty()) throw ParseError("empty " + std::string(what) + " text", {}, "(define");
  if (roots.size() > 1) throw ParseError("trailing content after " + std::string(what), roots[1].span);
  return roots.front();
}

inline void check_ground_atom(const Domain& d, const std::vector<TypedName>& objects, const Atom& atom,
                              const SExpr& at) {
  const PredicateDecl* decl = d.find_predicate(atom.predicate);
  if (decl == nullptr) throw UnknownPredicate(describe(at.span) + ": unknown predicate '" + atom.predicate + "'");
  if (decl->arity() != atom.arity()) {
    throw ArityMismatch(describe(at.span) + ": predicate " + atom.predicate + " expects " +
                        std::to_string(decl->arity()) + " argument(s), got " + std::to_string(atom.arity()));
  }
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    auto it = std::find_if(objects.begin(), objects.end(), [&](const TypedName& o) { return o.name == atom.args[i]; });
    if (it == objects.end()) {
      throw UndeclaredObject(describe(at.span) + ": undeclared object '" + atom.args[i] + "' in " + to_string(atom));
    }
    if (!d.is_subtype(it->type, decl->param_types[i])) {
      throw TypeMismatch(describe(at.span) + ": object '" + atom.args[i] + "' of type " + it->type +
                         " does not match argument " + std::to_string(i + 1) + " of " + atom.predicate);
    }
  }
}

inline void collect_goal(const SExpr& f, std::vector<Atom>& out) {
  if (f.is_list && f.items.empty()) return;
  reject_formula_head(f);
  if (f.has_head("and")) {
    for (std::size_t i = 1; i < f.items.size(); ++i) collect_goal(f.items[i], out);
    return;
  }
  Atom atom = parse_atom_expr(f);
  if (std::find(out.begin(), out.end(), atom) == out.end()) out.push_back(std::move(atom));
}

}  // namespace detail

inline Domain parse_domain(std::string_view text) {
  const auto roots = read_sexprs(text);
  return detail::DomainReader{}.read(detail::single_root(roots, "domain"));
}

/// Parses a problem and type-checks its objects, init and goal against `d`.
inline Problem parse_problem(std::string_view text, const Domain& d) {
  using namespace detail;
  const auto roots = read_sexprs(text);
  const SExpr& root = single_root(roots, "problem");
  if (!root.has_head("define")) fail(root, "expected (define ...)", "(define");
  if (root.items.size() < 2 || !root.items[1].has_head("problem") || root.items[1].items.size() != 2) {
    fail(root, "expected (problem <name>)", "(problem");
  }
  Problem p;
  p.name = expect_token(root.items[1].items[1], "problem name");
  std::vector<std::pair<Atom, const SExpr*>> init_atoms;
  std::vector<const SExpr*> goal_nodes;
  std::vector<Atom> goal;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& s = root.items[i];
    expect_list(s, "problem section");
    if (s.items.empty()) fail(s, "empty section", ":init");
    const std::string& head = expect_token(s.items.front(), "section keyword");
    if (head == ":domain") {
      if (s.items.size() != 2) fail(s, "expected (:domain <name>)");
      p.domain_name = expect_token(s.items[1], "domain name");
      if (p.domain_name != d.name) {
        fail(s.items[1], "problem is for domain '" + p.domain_name + "', not '" + d.name + "'", d.name);
      }
    } else if (head == ":requirements") {
      check_requirements(s);
    } else if (head == ":objects") {
      for (auto& obj : parse_typed_list(s.items, 1, false)) {
        if (!d.has_type(obj.type)) throw UnknownType(describe(s.span) + ": unknown type '" + obj.type + "'");
        if (p.find_object(obj.name) != nullptr) fail(s, "duplicate object '" + obj.name + "'");
        p.objects.push_back(std::move(obj));
      }
    } else if (head == ":init") {
      for (std::size_t k = 1; k < s.items.size(); ++k) {
        reject_formula_head(s.items[k]);
        init_atoms.emplace_back(parse_atom_expr(s.items[k]), &s.items[k]);
      }
    } else if (head == ":goal") {
      if (s.items.size() != 2) fail(s, "expected a single goal formula");
      collect_goal(s.items[1], goal);
      goal_nodes.push_back(&s.items[1]);
    } else if (head == ":metric") {
      throw UnsupportedFeature("plan metrics", s.span);
    } else if (head == ":constraints") {
      throw UnsupportedFeature("constraints", s.span);
    } else {
      fail(s.items.front(), "unknown problem section '" + head + "'", ":goal");
    }
  }
  if (p.domain_name.empty()) fail(root, "missing (:domain ...)", "(:domain");
  for (auto& [atom, node] : init_atoms) {
    check_ground_atom(d, p.objects, atom, *node);
    p.init.insert(std::move(atom));
  }
  for (const auto& atom : goal) check_ground_atom(d, p.objects, atom, goal_nodes.empty() ? root : *goal_nodes.back());
  p.goal = std::move(goal);
  return p;
}

/// Reads action references "(name arg ...)", one per line. No resolution.
inline Plan parse_plan(std::string_view text) {
  Plan plan;
  for (const auto& e : read_sexprs(text)) {
    Atom call = detail::parse_atom_expr(e);
    plan.steps.push_back(ActionRef{std::move(call.predicate), std::move(call.args)});
  }
  return plan;
}

/// Like parse_plan(text) but every action must resolve against the domain and
/// the problem's objects.
inline Plan parse_plan(std::string_view text, const Domain& d, const Problem& p) {
  Plan plan;
  for (const auto& e : read_sexprs(text)) {
    Atom call = detail::parse_atom_expr(e);
    ActionRef ref{std::move(call.predicate), std::move(call.args)};
    try {
      resolve(d, p, ref);
    } catch (const UnknownAction& err) {
      throw UnknownAction(describe(e.span) + ": " + err.what());
    } catch (const ArityMismatch& err) {
      throw ArityMismatch(describe(e.span) + ": " + err.what());
    } catch (const UndeclaredObject& err) {
      throw UndeclaredObject(describe(e.span) + ": " + err.what());
    } catch (const TypeMismatch& err) {
      throw TypeMismatch(describe(e.span) + ": " + err.what());
    }
    plan.steps.push_back(std::move(ref));
  }
  return plan;
}

/// Atoms written inline, e.g. "(clear a) (handempty)"; used by trace states.
inline std::vector<Atom> parse_atoms(std::string_view text) {
  std::vector<Atom> out;
  for (const auto& e : read_sexprs(text)) out.push_back(detail::parse_atom_expr(e));
  return out;
}

namespace detail {

inline std::string typed_list(const std::vector<TypedName>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ' ';
    out += names[i].name;
    if (i + 1 == names.size() || names[i + 1].type != names[i].type) out += " - " + names[i].type;
  }
  return out;
}

inline std::string conjunction(const std::vector<Atom>& atoms) {
  std::string out = "(and";
  for (const auto& a : atoms) out += " " + to_string(a);
  return out + ")";
}

}  // namespace detail

inline std::string print_domain(const Domain& d) {
  std::string out = "(define (domain " + d.name + ")\n";
  out += "  (:requirements :strips :typing)\n";
  if (!d.types.empty()) {
    out += "  (:types";
    for (const auto& t : d.types) out += " " + t.name + " - " + t.parent;
    out += ")\n";
  }
  out += "  (:predicates";
  for (const auto& p : d.predicates) {
    out += "\n    (" + p.name;
    for (std::size_t i = 0; i < p.param_types.size(); ++i) {
      out += " ?a" + std::to_string(i) + " - " + p.param_types[i];
    }
    out += ")";
  }
  out += ")\n";
  for (const auto& a : d.actions) {
    out += "  (:action " + a.name + "\n";
    out += "    :parameters (" + detail::typed_list(a.params) + ")\n";
    out += "    :precondition " + detail::conjunction(a.pre) + "\n";
    out += "    :effect (and";
    for (const auto& atom : a.add) out += " " + to_string(atom);
    for (const auto& atom : a.del) out += " (not " + to_string(atom) + ")";
    out += "))\n";
  }
  out += ")\n";
  return out;
}

inline std::string print_problem(const Problem& p) {
  std::string out = "(define (problem " + p.name + ")\n";
  out += "  (:domain " + p.domain_name + ")\n";
  out += "  (:objects" + std::string(p.objects.empty() ? "" : " ") + detail::typed_list(p.objects) + ")\n";
  out += "  (:init";
  for (const auto& atom : p.init) out += "\n    " + to_string(atom);
  out += ")\n";
  out += "  (:goal " + detail::conjunction(p.goal) + "))\n";
  return out;
}

inline std::string print_plan(const Plan& plan) {
  std::string out;
  for (const auto& step : plan.steps) out += to_string(step) + "\n";
  return out;
}

}  // namespace pddl_instruct
