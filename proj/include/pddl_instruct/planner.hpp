#pragma once

// Breadth-first satisficing planner, reachable-state enumeration and seeded
// random walks.

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pddl_instruct/core.hpp"

namespace pddl_instruct {

struct SearchLimits {
  std::size_t max_expanded_states = 2'000'000;
  std::size_t max_plan_length = 1'000;
  std::chrono::milliseconds timeout{60'000};
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  std::chrono::milliseconds elapsed{0};
};

enum class SolveStatus { solved, unsolvable, limit_exceeded };

struct SolveResult {
  SolveStatus status = SolveStatus::unsolvable;
  Plan plan;
  SearchStats stats;
  std::string limit;  // which limit was hit, for limit_exceeded

  bool solved() const { return status == SolveStatus::solved; }
};

class LimitExceeded : public Error {
 public:
  LimitExceeded(const std::string& what, SearchStats stats) : Error(what), stats_(stats) {}
  const SearchStats& stats() const { return stats_; }

 private:
  SearchStats stats_;
};

class DeadEnd : public Error {
 public:
  using Error::Error;
};

/// Uniform index in [0, n) that does not depend on the standard library's
/// distribution implementation.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

namespace detail {

/// Ground task with atoms interned to bit positions.
class CompiledTask {
 public:
  using Bits = std::vector<std::uint64_t>;

  struct Op {
    std::vector<std::size_t> pre, add, del;
  };

  CompiledTask(const Domain& d, const Problem& p) : actions_(ground(d, p)) {
    for (const auto& a : actions_) {
      Op op;
      for (const auto& atom : a.pre) op.pre.push_back(intern(atom));
      for (const auto& atom : a.add) op.add.push_back(intern(atom));
      for (const auto& atom : a.del) op.del.push_back(intern(atom));
      ops_.push_back(std::move(op));
    }
    for (const auto& atom : p.init) intern(atom);
    for (const auto& atom : p.goal) goal_.push_back(intern(atom));
    words_ = (atoms_.size() + 63) / 64;
    init_ = encode(p.init);
  }

  const std::vector<GroundAction>& actions() const { return actions_; }
  const Bits& init() const { return init_; }

  Bits encode(const State& s) const {
    Bits bits(words_, 0);
    for (const auto& atom : s) {
      auto it = index_.find(atom);
      if (it != index_.end()) set(bits, it->second);
    }
    return bits;
  }

  State decode(const Bits& bits) const {
    State s;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (test(bits, i)) s.insert(atoms_[i]);
    }
    return s;
  }

  bool applicable(const Bits& s, std::size_t op) const {
    for (auto i : ops_[op].pre) {
      if (!test(s, i)) return false;
    }
    return true;
  }

  Bits apply(const Bits& s, std::size_t op) const {
    Bits next = s;
    for (auto i : ops_[op].del) next[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    for (auto i : ops_[op].add) set(next, i);
    return next;
  }

  bool goal(const Bits& s) const {
    for (auto i : goal_) {
      if (!test(s, i)) return false;
    }
    return true;
  }

  struct Hash {
    std::size_t operator()(const Bits& b) const noexcept {
      std::uint64_t h = 1469598103934665603ULL;
      for (auto w : b) h = (h ^ w) * 1099511628211ULL;
      return static_cast<std::size_t>(h);
    }
  };

 private:
  static bool test(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1U; }
  static void set(Bits& b, std::size_t i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }

  std::size_t intern(const Atom& atom) {
    auto [it, inserted] = index_.emplace(atom, atoms_.size());
    if (inserted) atoms_.push_back(atom);
    return it->second;
  }

  std::vector<GroundAction> actions_;
  std::vector<Op> ops_;
  std::vector<Atom> atoms_;
  std::unordered_map<Atom, std::size_t> index_;
  std::vector<std::size_t> goal_;
  std::size_t words_ = 0;
  Bits init_;
};

}  // namespace detail

/// Breadth-first search over ground actions in grounding order. Returned plans
/// have minimal length.
inline SolveResult solve(const Domain& d, const Problem& p, const SearchLimits& limits = {}) {
  using Bits = detail::CompiledTask::Bits;
  const auto started = std::chrono::steady_clock::now();
  detail::CompiledTask task(d, p);
  SolveResult result;

  struct Node {
    std::size_t parent;
    std::size_t op;
    std::size_t depth;
  };
  std::vector<Node> nodes;
  std::vector<Bits> states;
  std::unordered_map<Bits, std::size_t, detail::CompiledTask::Hash> seen;
  std::deque<std::size_t> open;

  auto finish = [&](SolveStatus status) {
    result.status = status;
    result.stats.elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return result;
  };
  auto extract = [&](std::size_t node) {
    std::vector<ActionRef> rev;
    for (; node != 0; node = nodes[node].parent) rev.push_back(task.actions()[nodes[node].op].ref);
    result.plan.steps.assign(rev.rbegin(), rev.rend());
  };

  nodes.push_back(Node{0, 0, 0});
  states.push_back(task.init());
  seen.emplace(task.init(), 0);
  if (task.goal(task.init())) return finish(SolveStatus::solved);
  open.push_back(0);
  bool pruned = false;

  while (!open.empty()) {
    std::size_t current = open.front();
    open.pop_front();
    if (nodes[current].depth >= limits.max_plan_length) {
      pruned = true;
      continue;
    }
    if (result.stats.expanded >= limits.max_expanded_states) {
      result.limit = "max_expanded_states";
      return finish(SolveStatus::limit_exceeded);
    }
    if ((result.stats.expanded & 255U) == 0 && std::chrono::steady_clock::now() - started > limits.timeout) {
      result.limit = "timeout";
      return finish(SolveStatus::limit_exceeded);
    }
    ++result.stats.expanded;
    for (std::size_t op = 0; op < task.actions().size(); ++op) {
      if (!task.applicable(states[current], op)) continue;
      Bits next = task.apply(states[current], op);
      ++result.stats.generated;
      if (seen.count(next) != 0) continue;
      std::size_t id = nodes.size();
      nodes.push_back(Node{current, op, nodes[current].depth + 1});
      seen.emplace(next, id);
      if (task.goal(next)) {
        extract(id);
        return finish(SolveStatus::solved);
      }
      states.push_back(std::move(next));
      open.push_back(id);
    }
  }
  if (pruned) {
    result.limit = "max_plan_length";
    return finish(SolveStatus::limit_exceeded);
  }
  return finish(SolveStatus::unsolvable);
}

/// States reachable from the initial state in at most `bound` steps
/// (unbounded when empty). Throws LimitExceeded past `max_states`.
inline std::set<State> reachable_states(const Domain& d, const Problem& p, std::optional<std::size_t> bound = {},
                                        std::size_t max_states = 1'000'000) {
  using Bits = detail::CompiledTask::Bits;
  detail::CompiledTask task(d, p);
  std::unordered_map<Bits, std::size_t, detail::CompiledTask::Hash> depth;
  std::deque<Bits> open;
  depth.emplace(task.init(), 0);
  open.push_back(task.init());
  SearchStats stats;
  while (!open.empty()) {
    Bits current = std::move(open.front());
    open.pop_front();
    std::size_t dcur = depth.at(current);
    if (bound && dcur >= *bound) continue;
    ++stats.expanded;
    for (std::size_t op = 0; op < task.actions().size(); ++op) {
      if (!task.applicable(current, op)) continue;
      Bits next = task.apply(current, op);
      ++stats.generated;
      if (depth.count(next) != 0) continue;
      if (depth.size() >= max_states) throw LimitExceeded("more than " + std::to_string(max_states) + " states", stats);
      depth.emplace(next, dcur + 1);
      open.push_back(std::move(next));
    }
  }
  std::set<State> out;
  for (const auto& [bits, _] : depth) out.insert(task.decode(bits));
  return out;
}

/// Uniformly random applicable actions from the initial state; the goal is
/// ignored. Throws DeadEnd when no action is applicable before `length`.
inline Plan random_walk(const Domain& d, const Problem& p, std::size_t length, std::uint64_t seed) {
  detail::CompiledTask task(d, p);
  std::mt19937_64 rng(seed);
  Plan plan;
  auto state = task.init();
  std::vector<std::size_t> candidates;
  for (std::size_t step = 0; step < length; ++step) {
    candidates.clear();
    for (std::size_t op = 0; op < task.actions().size(); ++op) {
      if (task.applicable(state, op)) candidates.push_back(op);
    }
    if (candidates.empty()) throw DeadEnd("no applicable action after " + std::to_string(step) + " step(s)");
    std::size_t op = candidates[pick(rng, candidates.size())];
    plan.steps.push_back(task.actions()[op].ref);
    state = task.apply(state, op);
  }
  return plan;
}

}  // namespace pddl_instruct
