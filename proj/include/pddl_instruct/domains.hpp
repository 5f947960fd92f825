#pragma once

// The three evaluation domains (Blocksworld, Mystery Blocksworld, Logistics),
// seeded problem generators and symbol obfuscation.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pddl_instruct/planner.hpp"
#include "pddl_instruct/text.hpp"
#include "pddl_instruct/trace.hpp"

namespace pddl_instruct {

inline constexpr std::string_view kBlocksworldPddl = R"((define (domain blocksworld)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (on ?x - block ?y - block)
               (ontable ?x - block)
               (clear ?x - block)
               (handempty)
               (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down
    :parameters (?x - block)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
)";

inline constexpr std::string_view kLogisticsPddl = R"((define (domain logistics)
  (:requirements :strips :typing)
  (:types truck airplane - vehicle
          package vehicle - physobj
          airport - location
          city location physobj - object)
  (:predicates (in-city ?loc - location ?city - city)
               (at ?obj - physobj ?loc - location)
               (in ?pkg - package ?veh - vehicle))
  (:action load-truck
    :parameters (?pkg - package ?truck - truck ?loc - location)
    :precondition (and (at ?truck ?loc) (at ?pkg ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?truck)))
  (:action unload-truck
    :parameters (?pkg - package ?truck - truck ?loc - location)
    :precondition (and (at ?truck ?loc) (in ?pkg ?truck))
    :effect (and (not (in ?pkg ?truck)) (at ?pkg ?loc)))
  (:action drive-truck
    :parameters (?truck - truck ?loc-from - location ?loc-to - location ?city - city)
    :precondition (and (at ?truck ?loc-from) (in-city ?loc-from ?city) (in-city ?loc-to ?city))
    :effect (and (not (at ?truck ?loc-from)) (at ?truck ?loc-to)))
  (:action load-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - location)
    :precondition (and (at ?pkg ?loc) (at ?airplane ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?airplane)))
  (:action unload-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - location)
    :precondition (and (in ?pkg ?airplane) (at ?airplane ?loc))
    :effect (and (not (in ?pkg ?airplane)) (at ?pkg ?loc)))
  (:action fly-airplane
    :parameters (?airplane - airplane ?loc-from - airport ?loc-to - airport)
    :precondition (at ?airplane ?loc-from)
    :effect (and (not (at ?airplane ?loc-from)) (at ?airplane ?loc-to))))
)";

inline const Domain& blocksworld_domain() {
  static const Domain d = parse_domain(kBlocksworldPddl);
  return d;
}

inline const Domain& logistics_domain() {
  static const Domain d = parse_domain(kLogisticsPddl);
  return d;
}

enum class DomainKind { blocksworld, mystery_blocksworld, logistics };

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::blocksworld: return "blocksworld";
    case DomainKind::mystery_blocksworld: return "mystery_blocksworld";
    case DomainKind::logistics: return "logistics";
  }
  return "blocksworld";
}

inline std::optional<DomainKind> domain_kind_from_string(std::string_view s) {
  for (auto k : {DomainKind::blocksworld, DomainKind::mystery_blocksworld, DomainKind::logistics}) {
    if (to_string(k) == s) return k;
  }
  if (s == "mystery") return DomainKind::mystery_blocksworld;
  return std::nullopt;
}

struct BlocksworldSize {
  std::size_t blocks = 4;
};

struct LogisticsSize {
  std::size_t cities = 2;
  std::size_t locations_per_city = 2;  // the first location of each city is its airport
  std::size_t packages = 2;
  std::size_t trucks_per_city = 1;
  std::size_t airplanes = 1;
};

struct GeneratorSizes {
  BlocksworldSize blocksworld;
  LogisticsSize logistics;
};

namespace detail {

inline std::string block_name(std::size_t i, std::size_t n) {
  if (n <= 26) return std::string(1, static_cast<char>('a' + i));
  return "b" + std::to_string(i + 1);
}

inline std::vector<Atom> blocks_goal_of(const State& s) {
  std::vector<Atom> goal;
  for (const auto& atom : s) {
    if (atom.predicate == "on") goal.push_back(atom);
  }
  if (goal.empty()) {
    for (const auto& atom : s) {
      if (atom.predicate == "ontable") goal.push_back(atom);
    }
  }
  return goal;
}

/// Executes a random walk and then puts down any held block.
inline State settle_walk(const Domain& d, const Problem& p, std::size_t length, std::uint64_t seed) {
  Plan walk = random_walk(d, p, length, seed);
  State s = p.init;
  for (const auto& ref : walk.steps) s = apply(s, resolve(d, p, ref));
  for (const auto& atom : State(s)) {
    if (atom.predicate == "holding") s = apply(s, resolve(d, p, ActionRef{"put-down", atom.args}));
  }
  return s;
}

}  // namespace detail

/// Random Blocksworld instance. Both the initial and goal configurations are
/// reached from the all-on-table state by random walks, so every instance is
/// solvable.
inline Problem gen_blocksworld_problem(const BlocksworldSize& size, std::uint64_t seed) {
  if (size.blocks == 0) throw Error("blocksworld problems need at least one block");
  const Domain& d = blocksworld_domain();
  std::mt19937_64 rng(seed);
  Problem p;
  p.name = "blocksworld-" + std::to_string(size.blocks) + "-" + std::to_string(seed);
  p.domain_name = d.name;
  for (std::size_t i = 0; i < size.blocks; ++i) p.objects.push_back(TypedName{detail::block_name(i, size.blocks), "block"});
  for (const auto& o : p.objects) {
    p.init.insert(Atom{"ontable", {o.name}});
    p.init.insert(Atom{"clear", {o.name}});
  }
  p.init.insert(Atom{"handempty", {}});
  const std::size_t walk = 4 * size.blocks + 1;
  p.init = detail::settle_walk(d, p, walk, rng());
  for (int attempt = 0; attempt < 32; ++attempt) {
    p.goal = detail::blocks_goal_of(detail::settle_walk(d, p, walk + (rng() % 4), rng()));
    if (!satisfies_goal(p.init, p.goal)) break;
  }
  return p;
}

/// Random Logistics instance. Every city has an airport and its own trucks and
/// at least one airplane exists, so every package placement is reachable.
inline Problem gen_logistics_problem(const LogisticsSize& size, std::uint64_t seed) {
  if (size.cities == 0 || size.locations_per_city == 0 || size.packages == 0 || size.trucks_per_city == 0 ||
      size.airplanes == 0) {
    throw Error("logistics size parameters must be positive");
  }
  std::mt19937_64 rng(seed);
  Problem p;
  p.name = "logistics-" + std::to_string(size.cities) + "-" + std::to_string(size.packages) + "-" + std::to_string(seed);
  p.domain_name = "logistics";
  std::vector<std::vector<std::string>> locations(size.cities);
  std::vector<std::string> airports;
  for (std::size_t c = 0; c < size.cities; ++c) {
    std::string city = "city" + std::to_string(c + 1);
    p.objects.push_back(TypedName{city, "city"});
    for (std::size_t l = 0; l < size.locations_per_city; ++l) {
      std::string loc = "loc" + std::to_string(c + 1) + "-" + std::to_string(l + 1);
      p.objects.push_back(TypedName{loc, l == 0 ? "airport" : "location"});
      p.init.insert(Atom{"in-city", {loc, city}});
      locations[c].push_back(loc);
      if (l == 0) airports.push_back(loc);
    }
  }
  std::vector<std::string> all_locations;
  for (const auto& ls : locations) all_locations.insert(all_locations.end(), ls.begin(), ls.end());
  for (std::size_t c = 0; c < size.cities; ++c) {
    for (std::size_t t = 0; t < size.trucks_per_city; ++t) {
      std::string truck = "truck" + std::to_string(c + 1) + "-" + std::to_string(t + 1);
      p.objects.push_back(TypedName{truck, "truck"});
      p.init.insert(Atom{"at", {truck, locations[c][pick(rng, locations[c].size())]}});
    }
  }
  for (std::size_t a = 0; a < size.airplanes; ++a) {
    std::string plane = "plane" + std::to_string(a + 1);
    p.objects.push_back(TypedName{plane, "airplane"});
    p.init.insert(Atom{"at", {plane, airports[pick(rng, airports.size())]}});
  }
  std::vector<std::string> start(size.packages);
  for (std::size_t k = 0; k < size.packages; ++k) {
    std::string pkg = "pkg" + std::to_string(k + 1);
    p.objects.push_back(TypedName{pkg, "package"});
    start[k] = all_locations[pick(rng, all_locations.size())];
    p.init.insert(Atom{"at", {pkg, start[k]}});
  }
  for (int attempt = 0; attempt < 32; ++attempt) {
    p.goal.clear();
    for (std::size_t k = 0; k < size.packages; ++k) {
      if (pick(rng, 2) == 0 && k + 1 != size.packages) continue;  // not every package needs a goal
      p.goal.push_back(Atom{"at", {"pkg" + std::to_string(k + 1), all_locations[pick(rng, all_locations.size())]}});
    }
    if (!satisfies_goal(p.init, p.goal)) break;
  }
  return p;
}

/// Bijective renaming of predicate, action and object names.
struct Renaming {
  std::map<std::string, std::string> predicates;
  std::map<std::string, std::string> actions;
  std::map<std::string, std::string> objects;

  static std::string lookup(const std::map<std::string, std::string>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? key : it->second;
  }

  Atom operator()(const Atom& a) const {
    Atom out{lookup(predicates, a.predicate), {}};
    for (const auto& arg : a.args) out.args.push_back(is_variable(arg) ? arg : lookup(objects, arg));
    return out;
  }
  State operator()(const State& s) const {
    State out;
    for (const auto& a : s) out.insert((*this)(a));
    return out;
  }
  std::vector<Atom> operator()(const std::vector<Atom>& atoms) const {
    std::vector<Atom> out;
    for (const auto& a : atoms) out.push_back((*this)(a));
    return out;
  }
  ActionRef operator()(const ActionRef& r) const {
    ActionRef out{lookup(actions, r.name), {}};
    for (const auto& arg : r.args) out.args.push_back(lookup(objects, arg));
    return out;
  }
  Plan operator()(const Plan& plan) const {
    Plan out;
    for (const auto& s : plan.steps) out.steps.push_back((*this)(s));
    return out;
  }
  CoTTrace operator()(const CoTTrace& t) const {
    CoTTrace out = t;
    for (auto& step : out.steps) {
      step.s_prev = (*this)(step.s_prev);
      step.action = (*this)(step.action);
      step.s_next = (*this)(step.s_next);
    }
    return out;
  }
  Domain operator()(const Domain& d) const {
    Domain out = d;
    for (auto& pred : out.predicates) pred.name = lookup(predicates, pred.name);
    for (auto& a : out.actions) {
      a.name = lookup(actions, a.name);
      a.pre = (*this)(a.pre);
      a.add = (*this)(a.add);
      a.del = (*this)(a.del);
    }
    return out;
  }
  Problem operator()(const Problem& p) const {
    Problem out = p;
    for (auto& o : out.objects) o.name = lookup(objects, o.name);
    out.init = (*this)(p.init);
    out.goal = (*this)(p.goal);
    return out;
  }

  /// Inverse map; valid because the renaming is a bijection.
  Renaming inverse() const {
    Renaming inv;
    for (const auto& [k, v] : predicates) inv.predicates[v] = k;
    for (const auto& [k, v] : actions) inv.actions[v] = k;
    for (const auto& [k, v] : objects) inv.objects[v] = k;
    return inv;
  }
};

struct Obfuscated {
  Domain domain;
  Problem problem;
  Renaming renaming;
};

namespace detail {

inline std::map<std::string, std::string> shuffled_tokens(const std::vector<std::string>& names, std::string_view prefix,
                                                          std::mt19937_64& rng) {
  std::vector<std::size_t> ids(names.size());
  std::iota(ids.begin(), ids.end(), 1);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[pick(rng, i)]);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = std::string(prefix) + std::to_string(ids[i]);
  return out;
}

}  // namespace detail

/// Renames predicates to "pred-k", actions to "act-k" and objects to "obj-k"
/// under a seeded shuffle. Arities, schemas and types are preserved.
inline Obfuscated obfuscate(const Domain& d, const Problem& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> preds, acts, objs;
  for (const auto& x : d.predicates) preds.push_back(x.name);
  for (const auto& x : d.actions) acts.push_back(x.name);
  for (const auto& x : p.objects) objs.push_back(x.name);
  Renaming r;
  r.predicates = detail::shuffled_tokens(preds, "pred-", rng);
  r.actions = detail::shuffled_tokens(acts, "act-", rng);
  r.objects = detail::shuffled_tokens(objs, "obj-", rng);
  return Obfuscated{r(d), r(p), r};
}

/// A generated planning task with its domain.
struct Instance {
  std::string id;
  DomainKind kind = DomainKind::blocksworld;
  Domain domain;
  Problem problem;
};

inline Instance gen_instance(DomainKind kind, const GeneratorSizes& sizes, std::uint64_t seed) {
  Instance inst;
  inst.kind = kind;
  switch (kind) {
    case DomainKind::blocksworld:
      inst.domain = blocksworld_domain();
      inst.problem = gen_blocksworld_problem(sizes.blocksworld, seed);
      break;
    case DomainKind::mystery_blocksworld: {
      auto ob = obfuscate(blocksworld_domain(), gen_blocksworld_problem(sizes.blocksworld, seed), seed);
      inst.domain = std::move(ob.domain);
      inst.problem = std::move(ob.problem);
      inst.problem.name = "mystery-" + inst.problem.name;
      break;
    }
    case DomainKind::logistics:
      inst.domain = logistics_domain();
      inst.problem = gen_logistics_problem(sizes.logistics, seed);
      break;
  }
  inst.id = inst.problem.name;
  return inst;
}

}  // namespace pddl_instruct
