#pragma once

// STRIPS planning formalism: atoms, states, action schemas, grounding and the
// transition function.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pddl_instruct {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownType : public Error {
 public:
  using Error::Error;
};

class UnknownAction : public Error {
 public:
  using Error::Error;
};

class UnknownPredicate : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class UndeclaredObject : public Error {
 public:
  using Error::Error;
};

class TypeMismatch : public Error {
 public:
  using Error::Error;
};

class InapplicableAction : public Error {
 public:
  using Error::Error;
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return out;
}

inline constexpr std::string_view kRootType = "object";

/// A ground fluent such as (on a b). Zero-arity atoms have no args.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  Atom() = default;
  Atom(std::string pred, std::vector<std::string> arguments = {})
      : predicate(std::move(pred)), args(std::move(arguments)) {}

  std::size_t arity() const { return args.size(); }

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// PDDL text form: "(on a b)", "(handempty)".
inline std::string to_string(const Atom& atom) {
  std::string out = "(" + atom.predicate;
  for (const auto& arg : atom.args) {
    out += ' ';
    out += arg;
  }
  out += ')';
  return out;
}

/// A finite set of ground atoms under closed-world semantics. Iteration order
/// is the canonical (lexicographic) order.
class State {
 public:
  using container = std::set<Atom>;
  using const_iterator = container::const_iterator;

  State() = default;
  State(std::initializer_list<Atom> atoms) : atoms_(atoms) {}
  explicit State(container atoms) : atoms_(std::move(atoms)) {}
  template <class It>
  State(It first, It last) : atoms_(first, last) {}

  bool contains(const Atom& atom) const { return atoms_.count(atom) != 0; }
  bool insert(Atom atom) { return atoms_.insert(std::move(atom)).second; }
  bool erase(const Atom& atom) { return atoms_.erase(atom) != 0; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }
  const_iterator begin() const { return atoms_.begin(); }
  const_iterator end() const { return atoms_.end(); }
  const container& atoms() const { return atoms_; }

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State& a, const State& b) { return a.atoms_ <=> b.atoms_; }

 private:
  container atoms_;
};

/// Space-separated atoms in canonical order, e.g. "(clear a) (handempty)".
inline std::string to_string(const State& state) {
  std::string out;
  for (const auto& atom : state) {
    if (!out.empty()) out += ' ';
    out += to_string(atom);
  }
  return out;
}

template <class Range>
bool subset_of(const Range& atoms, const State& state) {
  return std::all_of(std::begin(atoms), std::end(atoms),
                     [&](const Atom& a) { return state.contains(a); });
}

/// Atoms of `lhs` that are absent from `rhs`.
inline State difference(const State& lhs, const State& rhs) {
  State out;
  for (const auto& atom : lhs) {
    if (!rhs.contains(atom)) out.insert(atom);
  }
  return out;
}

/// |s \ s'| + |s' \ s|.
inline std::size_t state_distance(const State& s, const State& t) {
  std::size_t d = 0;
  for (const auto& atom : s) d += t.contains(atom) ? 0 : 1;
  for (const auto& atom : t) d += s.contains(atom) ? 0 : 1;
  return d;
}

struct TypedName {
  std::string name;
  std::string type{kRootType};

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> param_types;

  std::size_t arity() const { return param_types.size(); }
  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

/// Atom with variable ("?x") or constant arguments, as written in a schema.
using LiftedAtom = Atom;

inline bool is_variable(std::string_view term) { return !term.empty() && term.front() == '?'; }

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<LiftedAtom> pre;
  std::vector<LiftedAtom> add;
  std::vector<LiftedAtom> del;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

/// Declared type with its (single) parent. The root type "object" is implicit.
struct TypeDecl {
  std::string name;
  std::string parent{kRootType};

  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

struct Domain {
  std::string name;
  std::vector<TypeDecl> types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  friend bool operator==(const Domain&, const Domain&) = default;

  bool has_type(std::string_view type) const {
    if (type == kRootType) return true;
    return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == type; });
  }

  /// True iff `type` equals `ancestor` or inherits from it.
  bool is_subtype(std::string_view type, std::string_view ancestor) const {
    std::string current(type);
    for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
      if (current == ancestor) return true;
      if (current == kRootType) return false;
      auto it = std::find_if(types.begin(), types.end(),
                             [&](const TypeDecl& t) { return t.name == current; });
      if (it == types.end()) return false;
      current = it->parent;
    }
    return false;  // cyclic hierarchy
  }

  const PredicateDecl* find_predicate(std::string_view name) const {
    auto it = std::find_if(predicates.begin(), predicates.end(),
                           [&](const PredicateDecl& p) { return p.name == name; });
    return it == predicates.end() ? nullptr : &*it;
  }

  const ActionSchema* find_action(std::string_view name) const {
    auto it = std::find_if(actions.begin(), actions.end(),
                           [&](const ActionSchema& a) { return a.name == name; });
    return it == actions.end() ? nullptr : &*it;
  }
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  State init;
  std::vector<Atom> goal;

  friend bool operator==(const Problem&, const Problem&) = default;

  const TypedName* find_object(std::string_view name) const {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](const TypedName& o) { return o.name == name; });
    return it == objects.end() ? nullptr : &*it;
  }
};

/// An action as written in a plan or trace, not yet resolved against a domain.
struct ActionRef {
  std::string name;
  std::vector<std::string> args;

  friend bool operator==(const ActionRef&, const ActionRef&) = default;
  friend auto operator<=>(const ActionRef&, const ActionRef&) = default;
};

inline std::string to_string(const ActionRef& ref) {
  return to_string(Atom{ref.name, ref.args});
}

/// Fully instantiated action. pre/add/del keep schema order with duplicates
/// removed.
struct GroundAction {
  ActionRef ref;
  std::map<std::string, std::string> binding;
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;

  const std::string& name() const { return ref.name; }
  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

inline std::string to_string(const GroundAction& action) { return to_string(action.ref); }

/// Sequence of actions. Steps stay unresolved so that plans naming unknown
/// actions can still reach the validator.
struct Plan {
  std::vector<ActionRef> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

inline bool applicable(const State& s, const GroundAction& a) { return subset_of(a.pre, s); }

/// (s \ del(a)) ∪ add(a), regardless of applicability.
inline State apply_unchecked(const State& s, const GroundAction& a) {
  State next = s;
  for (const auto& atom : a.del) next.erase(atom);
  for (const auto& atom : a.add) next.insert(atom);
  return next;
}

inline State apply(const State& s, const GroundAction& a) {
  if (!applicable(s, a)) {
    throw InapplicableAction("action " + to_string(a) + " is not applicable");
  }
  return apply_unchecked(s, a);
}

template <class Range>
bool satisfies_goal(const State& s, const Range& goal) {
  return subset_of(goal, s);
}

namespace detail {

inline std::vector<Atom> substitute(const std::vector<LiftedAtom>& lifted,
                                    const std::map<std::string, std::string>& binding) {
  std::vector<Atom> out;
  out.reserve(lifted.size());
  for (const auto& atom : lifted) {
    Atom ground{atom.predicate, {}};
    ground.args.reserve(atom.args.size());
    for (const auto& term : atom.args) {
      auto it = binding.find(term);
      ground.args.push_back(it == binding.end() ? term : it->second);
    }
    if (std::find(out.begin(), out.end(), ground) == out.end()) out.push_back(std::move(ground));
  }
  return out;
}

}  // namespace detail

/// Instantiates `schema` with positional `args`. No type checking.
inline GroundAction instantiate(const ActionSchema& schema, const std::vector<std::string>& args) {
  if (args.size() != schema.params.size()) {
    throw ArityMismatch("action " + schema.name + " expects " + std::to_string(schema.params.size()) +
                        " argument(s), got " + std::to_string(args.size()));
  }
  GroundAction ground;
  ground.ref = ActionRef{schema.name, args};
  for (std::size_t i = 0; i < args.size(); ++i) ground.binding[schema.params[i].name] = args[i];
  ground.pre = detail::substitute(schema.pre, ground.binding);
  ground.add = detail::substitute(schema.add, ground.binding);
  ground.del = detail::substitute(schema.del, ground.binding);
  return ground;
}

/// Resolves `ref` against the domain and the problem's typed objects.
/// Throws UnknownAction, ArityMismatch, UndeclaredObject or TypeMismatch.
inline GroundAction resolve(const Domain& d, const std::vector<TypedName>& objects, const ActionRef& ref) {
  const ActionSchema* schema = d.find_action(ref.name);
  if (schema == nullptr) throw UnknownAction("unknown action '" + ref.name + "'");
  if (ref.args.size() != schema->params.size()) {
    throw ArityMismatch("action " + ref.name + " expects " + std::to_string(schema->params.size()) +
                        " argument(s), got " + std::to_string(ref.args.size()));
  }
  for (std::size_t i = 0; i < ref.args.size(); ++i) {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](const TypedName& o) { return o.name == ref.args[i]; });
    if (it == objects.end()) throw UndeclaredObject("undeclared object '" + ref.args[i] + "'");
    if (!d.is_subtype(it->type, schema->params[i].type)) {
      throw TypeMismatch("object '" + ref.args[i] + "' of type " + it->type + " does not match parameter " +
                         schema->params[i].name + " - " + schema->params[i].type + " of " + ref.name);
    }
  }
  return instantiate(*schema, ref.args);
}

inline GroundAction resolve(const Domain& d, const Problem& p, const ActionRef& ref) {
  return resolve(d, p.objects, ref);
}

/// Objects compatible with `type`, sorted by name.
inline std::vector<std::string> objects_of_type(const Domain& d, const std::vector<TypedName>& objects,
                                                std::string_view type) {
  std::vector<std::string> out;
  for (const auto& o : objects) {
    if (d.is_subtype(o.type, type)) out.push_back(o.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Every type-consistent instantiation of every schema: schema order, then
/// lexicographic binding order (first parameter most significant).
inline std::vector<GroundAction> ground(const Domain& d, const std::vector<TypedName>& objects) {
  for (const auto& o : objects) {
    if (!d.has_type(o.type)) throw UnknownType("object '" + o.name + "' has unknown type '" + o.type + "'");
  }
  std::vector<GroundAction> out;
  for (const auto& schema : d.actions) {
    std::vector<std::vector<std::string>> domains;
    bool empty_domain = false;
    for (const auto& param : schema.params) {
      if (!d.has_type(param.type)) {
        throw UnknownType("parameter " + param.name + " of " + schema.name + " has unknown type '" + param.type + "'");
      }
      domains.push_back(objects_of_type(d, objects, param.type));
      empty_domain = empty_domain || domains.back().empty();
    }
    if (empty_domain) continue;
    std::vector<std::size_t> cursor(domains.size(), 0);
    while (true) {
      std::vector<std::string> args;
      args.reserve(domains.size());
      for (std::size_t i = 0; i < domains.size(); ++i) args.push_back(domains[i][cursor[i]]);
      out.push_back(instantiate(schema, args));
      // odometer increment, last parameter fastest
      std::size_t pos = domains.size();
      while (pos > 0 && ++cursor[pos - 1] == domains[pos - 1].size()) {
        cursor[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }
  return out;
}

inline std::vector<GroundAction> ground(const Domain& d, const Problem& p) { return ground(d, p.objects); }

/// All type-correct ground atoms over the declared predicates.
inline std::vector<Atom> ground_atoms(const Domain& d, const std::vector<TypedName>& objects) {
  std::vector<Atom> out;
  for (const auto& pred : d.predicates) {
    std::vector<std::vector<std::string>> domains;
    for (const auto& type : pred.param_types) domains.push_back(objects_of_type(d, objects, type));
    std::vector<std::vector<std::string>> partial{{}};
    for (const auto& dom : domains) {
      std::vector<std::vector<std::string>> next;
      for (const auto& prefix : partial) {
        for (const auto& obj : dom) {
          auto extended = prefix;
          extended.push_back(obj);
          next.push_back(std::move(extended));
        }
      }
      partial = std::move(next);
    }
    for (auto& args : partial) out.emplace_back(pred.name, std::move(args));
  }
  return out;
}

}  // namespace pddl_instruct

template <>
struct std::hash<pddl_instruct::Atom> {
  std::size_t operator()(const pddl_instruct::Atom& atom) const noexcept {
    std::size_t h = std::hash<std::string>{}(atom.predicate);
    for (const auto& arg : atom.args) h = h * 1099511628211ULL ^ std::hash<std::string>{}(arg);
    return h;
  }
};

template <>
struct std::hash<pddl_instruct::State> {
  std::size_t operator()(const pddl_instruct::State& state) const noexcept {
    std::size_t h = 14695981039346656037ULL;
    for (const auto& atom : state) h = (h ^ std::hash<pddl_instruct::Atom>{}(atom)) * 1099511628211ULL;
    return h;
  }
};
