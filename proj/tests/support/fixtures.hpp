#pragma once

// Canned model completions for loop and evaluation tests.

#include <string>
#include <vector>

#include "pddl_instruct.hpp"

namespace fixtures {

using namespace pddl_instruct;

inline std::string correct_completion(const Instance& inst) {
  CoTTrace t = simulate_trace(inst.domain, inst.problem, solve(inst.domain, inst.problem).plan);
  t.declared_valid = true;
  t.confidence = 0.9;
  return render_trace(t);
}

/// A trace whose first action is inapplicable in the initial state.
inline std::string precondition_completion(const Instance& inst, std::uint64_t seed = 0) {
  Plan plan = solve(inst.domain, inst.problem).plan;
  CorruptedPlan bad = corrupt_plan(inst.domain, inst.problem, plan, CorruptionKind::precondition_unsatisfied, seed);
  // Claimed results copy the previous state so only the precondition fails.
  CoTTrace t;
  State s = inst.problem.init;
  for (const auto& step : bad.plan.steps) {
    GroundAction a = resolve(inst.domain, inst.problem, step);
    State next = applicable(s, a) ? apply(s, a) : s;
    t.steps.push_back({t.size() + 1, s, step, next, {}});
    s = next;
  }
  t.declared_valid = true;
  return render_trace(t);
}

inline std::string effect_completion(const Instance& inst, std::uint64_t seed = 0) {
  Plan plan = solve(inst.domain, inst.problem).plan;
  CorruptedPlan bad = corrupt_plan(inst.domain, inst.problem, plan, CorruptionKind::effect_misapplied, seed);
  bad.trace->declared_valid = false;
  bad.trace->confidence = 0.2;
  return render_trace(*bad.trace);
}

inline std::vector<Instance> blocks_problems(std::size_t n, std::uint64_t seed = 1) {
  return gen_problem_set({DomainKind::blocksworld}, {}, n, seed);
}

}  // namespace fixtures
