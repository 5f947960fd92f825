#pragma once

// Step-level and plan-level validation with binary/detailed feedback and the
// four-way failure classification.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pddl_instruct/core.hpp"
#include "pddl_instruct/trace.hpp"

namespace pddl_instruct {

enum class StepStatus { valid, precondition_violation, effect_mismatch, goal_failure };

enum class ErrorClass { precondition_violation, incorrect_effect, goal_not_achieved, invalid_sequence };

inline constexpr ErrorClass kAllErrorClasses[] = {ErrorClass::precondition_violation, ErrorClass::incorrect_effect,
                                                  ErrorClass::goal_not_achieved, ErrorClass::invalid_sequence};

inline std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::valid: return "valid";
    case StepStatus::precondition_violation: return "precondition_violation";
    case StepStatus::effect_mismatch: return "effect_mismatch";
    case StepStatus::goal_failure: return "goal_failure";
  }
  return "valid";
}

inline std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::precondition_violation: return "precondition_violation";
    case ErrorClass::incorrect_effect: return "incorrect_effect";
    case ErrorClass::goal_not_achieved: return "goal_not_achieved";
    case ErrorClass::invalid_sequence: return "invalid_sequence";
  }
  return "invalid_sequence";
}

/// Human-readable row label, as in failure breakdown tables.
inline std::string_view label(ErrorClass c) {
  switch (c) {
    case ErrorClass::precondition_violation: return "Precondition Violation";
    case ErrorClass::incorrect_effect: return "Incorrect Effect Application";
    case ErrorClass::goal_not_achieved: return "Goal Not Achieved";
    case ErrorClass::invalid_sequence: return "Invalid Action Sequence";
  }
  return "";
}

inline std::optional<StepStatus> step_status_from_string(std::string_view s) {
  for (auto st : {StepStatus::valid, StepStatus::precondition_violation, StepStatus::effect_mismatch,
                  StepStatus::goal_failure}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

inline std::optional<ErrorClass> error_class_from_string(std::string_view s) {
  for (auto c : kAllErrorClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

struct StateDiff {
  State missing;  // expected but not claimed
  State extra;    // claimed but not expected

  bool empty() const { return missing.empty() && extra.empty(); }
  friend bool operator==(const StateDiff&, const StateDiff&) = default;
};

struct StepVerdict {
  std::size_t index = 0;  // 1-based step number; 0 when unattached
  ActionRef action;
  StepStatus status = StepStatus::valid;
  std::vector<Atom> missing_preconditions;  // in precondition order
  State expected_state;
  State claimed_state;
  StateDiff state_diff;
  std::vector<Atom> unmet_goals;  // populated for goal_failure

  bool valid() const { return status == StepStatus::valid; }
  friend bool operator==(const StepVerdict&, const StepVerdict&) = default;
};

struct PlanVerdict {
  bool valid = false;
  std::optional<std::size_t> first_failure_index;  // 1-based; 0 = before any step
  std::vector<StepVerdict> per_step;
  State final_state;
  std::optional<ErrorClass> error_class;
  /// Reason for invalid_sequence failures (unknown action, broken chaining,
  /// unparseable output).
  std::string sequence_error;
  std::vector<Atom> unmet_goals;
  std::size_t plan_length = 0;

  friend bool operator==(const PlanVerdict&, const PlanVerdict&) = default;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Checks, in order: applicability of `a` in `s_prev`; `s_claimed` equals the
/// successor (the expected state is `s_prev` when `a` is inapplicable); on the
/// final step, goal satisfaction in `s_claimed`.
inline StepVerdict validate_step(const State& s_prev, const GroundAction& a, const State& s_claimed,
                                 const std::vector<Atom>* goal = nullptr, bool is_final = false) {
  StepVerdict v;
  v.action = a.ref;
  v.claimed_state = s_claimed;
  for (const auto& atom : a.pre) {
    if (!s_prev.contains(atom)) v.missing_preconditions.push_back(atom);
  }
  v.expected_state = v.missing_preconditions.empty() ? apply_unchecked(s_prev, a) : s_prev;
  v.state_diff.missing = difference(v.expected_state, s_claimed);
  v.state_diff.extra = difference(s_claimed, v.expected_state);
  if (!v.missing_preconditions.empty()) {
    v.status = StepStatus::precondition_violation;
  } else if (!v.state_diff.empty()) {
    v.status = StepStatus::effect_mismatch;
  } else if (is_final && goal != nullptr) {
    for (const auto& g : *goal) {
      if (!s_claimed.contains(g)) v.unmet_goals.push_back(g);
    }
    if (!v.unmet_goals.empty()) v.status = StepStatus::goal_failure;
  }
  return v;
}

/// Resolves `a` in the domain first; throws UnknownAction et al.
inline StepVerdict validate_step(const Domain& d, const Problem& p, const State& s_prev, const ActionRef& a,
                                 const State& s_claimed, const std::vector<Atom>* goal = nullptr,
                                 bool is_final = false) {
  return validate_step(s_prev, resolve(d, p, a), s_claimed, goal, is_final);
}

/// Precedence invalid_sequence > precondition_violation > incorrect_effect >
/// goal_not_achieved. Throws ContractViolation on a valid verdict.
inline ErrorClass classify_error(const PlanVerdict& v) {
  if (v.valid) throw ContractViolation("classify_error called on a valid verdict");
  if (!v.sequence_error.empty()) return ErrorClass::invalid_sequence;
  bool effect = false;
  for (const auto& step : v.per_step) {
    if (step.status == StepStatus::precondition_violation) return ErrorClass::precondition_violation;
    effect = effect || step.status == StepStatus::effect_mismatch;
  }
  if (effect) return ErrorClass::incorrect_effect;
  return ErrorClass::goal_not_achieved;
}

namespace detail {

inline void finish(PlanVerdict& v) {
  v.valid = v.sequence_error.empty() && v.unmet_goals.empty() && !v.first_failure_index.has_value();
  if (!v.valid) {
    if (!v.first_failure_index) v.first_failure_index = v.plan_length;
    v.error_class = classify_error(v);
  }
}

inline std::vector<Atom> unmet(const std::vector<Atom>& goal, const State& s) {
  std::vector<Atom> out;
  for (const auto& g : goal) {
    if (!s.contains(g)) out.push_back(g);
  }
  return out;
}

}  // namespace detail

/// Simulates `plan` from the initial state. Stops at the first failing step.
inline PlanVerdict validate_plan(const Domain& d, const Problem& p, const Plan& plan, bool check_goal = true) {
  PlanVerdict v;
  v.plan_length = plan.size();
  State state = p.init;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    GroundAction action;
    try {
      action = resolve(d, p, plan.steps[i]);
    } catch (const Error& err) {
      v.sequence_error = err.what();
      v.first_failure_index = i + 1;
      break;
    }
    bool is_final = i + 1 == plan.size();
    State next = applicable(state, action) ? apply_unchecked(state, action) : state;
    StepVerdict step = validate_step(state, action, next, check_goal ? &p.goal : nullptr, is_final);
    step.index = i + 1;
    v.per_step.push_back(step);
    if (step.status == StepStatus::precondition_violation) {
      v.first_failure_index = i + 1;
      break;
    }
    state = std::move(next);
    if (step.status == StepStatus::goal_failure) v.unmet_goals = step.unmet_goals;
  }
  v.final_state = state;
  if (check_goal && plan.empty()) v.unmet_goals = detail::unmet(p.goal, state);
  if (!v.unmet_goals.empty() && !v.first_failure_index) v.first_failure_index = plan.size();
  detail::finish(v);
  return v;
}

/// Validates claimed states as well as actions: each step must continue from
/// the previous result (the first from the initial state), be applicable, and
/// produce exactly the successor state; the last must reach the goal.
inline PlanVerdict validate_trace(const Domain& d, const Problem& p, const CoTTrace& trace) {
  PlanVerdict v;
  v.plan_length = trace.size();
  State state = p.init;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const ReasoningStep& step = trace.steps[i];
    if (step.s_prev != state) {
      v.sequence_error = i == 0 ? "claimed state does not match the initial state"
                                : "claimed state does not continue from the result of step " + std::to_string(i);
      v.first_failure_index = i + 1;
      break;
    }
    GroundAction action;
    try {
      action = resolve(d, p, step.action);
    } catch (const Error& err) {
      v.sequence_error = err.what();
      v.first_failure_index = i + 1;
      break;
    }
    StepVerdict sv = validate_step(state, action, step.s_next, &p.goal, i + 1 == trace.size());
    sv.index = i + 1;
    v.per_step.push_back(sv);
    if (sv.status == StepStatus::precondition_violation || sv.status == StepStatus::effect_mismatch) {
      v.first_failure_index = i + 1;
      break;
    }
    state = step.s_next;
    if (sv.status == StepStatus::goal_failure) v.unmet_goals = sv.unmet_goals;
  }
  v.final_state = state;
  if (trace.empty()) v.unmet_goals = detail::unmet(p.goal, state);
  if (!v.unmet_goals.empty() && !v.first_failure_index) v.first_failure_index = trace.size();
  detail::finish(v);
  return v;
}

/// Verdict for model output that could not be parsed as a trace.
inline PlanVerdict unparseable_verdict(const std::string& reason) {
  PlanVerdict v;
  v.sequence_error = "unparseable output: " + reason;
  v.first_failure_index = 0;
  detail::finish(v);
  return v;
}

}  // namespace pddl_instruct
