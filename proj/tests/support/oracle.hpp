#pragma once

// Brute-force reference semantics for tests. Works on atom strings and
// re-derives grounding, applicability and the transition from the schema
// text fields; it never calls the library's apply/resolve/validator.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pddl_instruct/core.hpp"

namespace oracle {

using Facts = std::set<std::string>;

enum class Outcome { valid, precondition, goal, sequence };

struct Run {
  Outcome outcome = Outcome::valid;
  std::size_t failed_at = 0;  // 1-based step; 0 = no step reached
  Facts final_facts;
};

inline Facts facts_of(const pddl_instruct::State& s) {
  Facts out;
  for (const auto& a : s) out.insert(pddl_instruct::to_string(a));
  return out;
}

inline std::string fact(const std::string& pred, const std::vector<std::string>& args) {
  std::string out = "(" + pred;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

inline bool descends(const pddl_instruct::Domain& d, std::string type, const std::string& ancestor) {
  for (int hops = 0; hops < 64; ++hops) {
    if (type == ancestor || ancestor == "object") return true;
    bool found = false;
    for (const auto& t : d.types) {
      if (t.name == type) {
        type = t.parent;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return false;
}

struct Ground {
  Facts pre, add, del;
};

/// nullopt when the action name, arity, objects or types do not check out.
inline std::optional<Ground> ground(const pddl_instruct::Domain& d, const pddl_instruct::Problem& p,
                                    const std::string& name, const std::vector<std::string>& args) {
  const pddl_instruct::ActionSchema* schema = nullptr;
  for (const auto& a : d.actions) {
    if (a.name == name) schema = &a;
  }
  if (schema == nullptr || schema->params.size() != args.size()) return std::nullopt;
  std::map<std::string, std::string> bind;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const pddl_instruct::TypedName* obj = nullptr;
    for (const auto& o : p.objects) {
      if (o.name == args[i]) obj = &o;
    }
    if (obj == nullptr || !descends(d, obj->type, schema->params[i].type)) return std::nullopt;
    bind[schema->params[i].name] = args[i];
  }
  auto sub = [&](const std::vector<pddl_instruct::Atom>& atoms) {
    Facts out;
    for (const auto& a : atoms) {
      std::vector<std::string> xs;
      for (const auto& t : a.args) xs.push_back(bind.count(t) ? bind[t] : t);
      out.insert(fact(a.predicate, xs));
    }
    return out;
  };
  return Ground{sub(schema->pre), sub(schema->add), sub(schema->del)};
}

inline bool holds(const Facts& need, const Facts& s) {
  for (const auto& f : need) {
    if (!s.count(f)) return false;
  }
  return true;
}

inline Facts step(const Facts& s, const Ground& g) {
  Facts out;
  for (const auto& f : s) {
    if (!g.del.count(f)) out.insert(f);
  }
  out.insert(g.add.begin(), g.add.end());
  return out;
}

inline Facts goal_facts(const pddl_instruct::Problem& p) {
  Facts out;
  for (const auto& a : p.goal) out.insert(pddl_instruct::to_string(a));
  return out;
}

inline Run simulate(const pddl_instruct::Domain& d, const pddl_instruct::Problem& p,
                    const std::vector<pddl_instruct::ActionRef>& plan) {
  Run r;
  Facts s = facts_of(p.init);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    auto g = ground(d, p, plan[i].name, plan[i].args);
    if (!g) return Run{Outcome::sequence, i + 1, s};
    if (!holds(g->pre, s)) return Run{Outcome::precondition, i + 1, s};
    s = step(s, *g);
  }
  r.final_facts = s;
  if (!holds(goal_facts(p), s)) {
    r.outcome = Outcome::goal;
    r.failed_at = plan.size();
  }
  return r;
}

/// Every type-correct ground action, by brute force over object tuples.
inline std::vector<std::pair<std::string, Ground>> all_actions(const pddl_instruct::Domain& d,
                                                               const pddl_instruct::Problem& p) {
  std::vector<std::pair<std::string, Ground>> out;
  for (const auto& a : d.actions) {
    std::size_t n = a.params.size();
    std::size_t m = p.objects.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= m;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<std::string> args;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= m) args.push_back(p.objects[c % m].name);
      if (auto g = ground(d, p, a.name, args)) out.emplace_back(fact(a.name, args), std::move(*g));
    }
  }
  return out;
}

/// Length of a shortest plan by layered enumeration; nullopt if none within
/// `max_depth`.
inline std::optional<std::size_t> shortest_plan_length(const pddl_instruct::Domain& d,
                                                       const pddl_instruct::Problem& p, std::size_t max_depth) {
  auto actions = all_actions(d, p);
  Facts goal = goal_facts(p);
  std::set<Facts> seen{facts_of(p.init)};
  std::set<Facts> layer = seen;
  for (std::size_t depth = 0; depth <= max_depth; ++depth) {
    for (const auto& s : layer) {
      if (holds(goal, s)) return depth;
    }
    std::set<Facts> next;
    for (const auto& s : layer) {
      for (const auto& [_, g] : actions) {
        if (!holds(g.pre, s)) continue;
        Facts t = step(s, g);
        if (seen.insert(t).second) next.insert(std::move(t));
      }
    }
    if (next.empty()) return std::nullopt;
    layer = std::move(next);
  }
  return std::nullopt;
}

inline std::size_t count_reachable(const pddl_instruct::Domain& d, const pddl_instruct::Problem& p) {
  auto actions = all_actions(d, p);
  std::set<Facts> seen{facts_of(p.init)};
  std::vector<Facts> frontier{facts_of(p.init)};
  while (!frontier.empty()) {
    Facts s = frontier.back();
    frontier.pop_back();
    for (const auto& [_, g] : actions) {
      if (!holds(g.pre, s)) continue;
      Facts t = step(s, g);
      if (seen.insert(t).second) frontier.push_back(std::move(t));
    }
  }
  return seen.size();
}

}  // namespace oracle
