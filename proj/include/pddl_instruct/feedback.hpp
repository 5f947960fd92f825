#pragma once

// Binary and detailed feedback text.
//
// Detailed grammar (stable; datasets depend on it):
//
//   valid: <n> step(s) executed and goal reached
//   invalid: <error_class>
//   step <i>: action <act>: missing preconditions: <atom>, <atom>
//   step <i>: action <act>: incorrect effects: missing atoms: <atoms|none>; unexpected atoms: <atoms|none>
//   step <i>: action <act>: goal not achieved: unmet goals: <atom>, <atom>
//   step <i>: goal not achieved: unmet goals: <atom>, ...          (empty plan, i = 0)
//   step <i>: invalid action sequence: <reason>

#include <string>
#include <variant>

#include "pddl_instruct/validator.hpp"

namespace pddl_instruct {

enum class FeedbackMode { binary, detailed };

inline std::string_view to_string(FeedbackMode m) { return m == FeedbackMode::binary ? "binary" : "detailed"; }

inline std::optional<FeedbackMode> feedback_mode_from_string(std::string_view s) {
  if (s == "binary") return FeedbackMode::binary;
  if (s == "detailed") return FeedbackMode::detailed;
  return std::nullopt;
}

struct Feedback {
  FeedbackMode mode = FeedbackMode::binary;
  std::string text;
  std::variant<StepVerdict, PlanVerdict> verdict;
};

namespace detail {

template <class Range>
std::string join_atoms(const Range& atoms) {
  std::string out;
  for (const auto& atom : atoms) {
    if (!out.empty()) out += ", ";
    out += to_string(atom);
  }
  return out.empty() ? "none" : out;
}

inline std::string step_line(const StepVerdict& s) {
  std::string head = "step " + std::to_string(s.index) + ": action " + to_string(s.action) + ": ";
  switch (s.status) {
    case StepStatus::valid:
      return head + "valid";
    case StepStatus::precondition_violation:
      return head + "missing preconditions: " + join_atoms(s.missing_preconditions);
    case StepStatus::effect_mismatch:
      return head + "incorrect effects: missing atoms: " + join_atoms(s.state_diff.missing) +
             "; unexpected atoms: " + join_atoms(s.state_diff.extra);
    case StepStatus::goal_failure:
      return head + "goal not achieved: unmet goals: " + join_atoms(s.unmet_goals);
  }
  return head;
}

}  // namespace detail

inline std::string detailed_text(const PlanVerdict& v) {
  if (v.valid) return "valid: " + std::to_string(v.plan_length) + " step(s) executed and goal reached";
  std::string out = "invalid: " + std::string(to_string(*v.error_class)) + "\n";
  std::size_t at = v.first_failure_index.value_or(v.plan_length);
  if (!v.sequence_error.empty()) return out + "step " + std::to_string(at) + ": invalid action sequence: " + v.sequence_error;
  for (const auto& step : v.per_step) {
    if (!step.valid()) return out + detail::step_line(step);
  }
  return out + "step " + std::to_string(at) + ": goal not achieved: unmet goals: " + detail::join_atoms(v.unmet_goals);
}

inline Feedback render_feedback(const PlanVerdict& v, FeedbackMode mode) {
  std::string text = mode == FeedbackMode::binary ? (v.valid ? "valid" : "invalid") : detailed_text(v);
  return Feedback{mode, std::move(text), v};
}

inline Feedback render_feedback(const StepVerdict& v, FeedbackMode mode) {
  std::string text = mode == FeedbackMode::binary ? (v.valid() ? "valid" : "invalid") : detail::step_line(v);
  return Feedback{mode, std::move(text), v};
}

}  // namespace pddl_instruct
