#pragma once

// Reasoning and final-performance losses, computed as metrics over datasets.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "pddl_instruct/records.hpp"
#include "pddl_instruct/validator.hpp"

namespace pddl_instruct {

struct LossWeights {
  double alpha_precond = 1.0;
  double alpha_effect = 1.0;
  double alpha_goal = 1.5;
  double lambda_feedback = 0.1;
  double beta = 2.0;   // fixed penalty for invalid plans
  double alpha = 0.5;  // weight of the validity BCE term
  double bce_epsilon = 1e-6;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

inline double loss_feedback(StepStatus status, const LossWeights& w = {}) {
  switch (status) {
    case StepStatus::valid: return 0.0;
    case StepStatus::precondition_violation: return w.alpha_precond;
    case StepStatus::effect_mismatch: return w.alpha_effect;
    case StepStatus::goal_failure: return w.alpha_goal;
  }
  return 0.0;
}

inline double loss_feedback(const StepVerdict& f, const LossWeights& w = {}) { return loss_feedback(f.status, w); }

/// d_state(claimed, expected) + lambda_feedback * loss_feedback.
inline double loss_step(const ReasoningRecord& rec, const LossWeights& w = {}) {
  return static_cast<double>(state_distance(rec.s_claimed, rec.feedback.expected_state)) +
         w.lambda_feedback * loss_feedback(rec.feedback, w);
}

/// Binary cross-entropy with v_hat clamped to [epsilon, 1 - epsilon].
inline double bce(int v, double v_hat, double epsilon = 1e-6) {
  double p = std::clamp(v_hat, epsilon, 1.0 - epsilon);
  return -(v * std::log(p) + (1 - v) * std::log(1.0 - p));
}

inline double loss_plan(int v, double v_hat, const LossWeights& w = {}) {
  return (v == 0 ? w.beta : 0.0) + w.alpha * bce(v, v_hat, w.bce_epsilon);
}

inline double loss_plan(const FinalRecord& rec, const LossWeights& w = {}) { return loss_plan(rec.v, rec.v_hat, w); }

namespace detail {

template <class Record, class Fn>
double mean_over(std::span<const Record> records, Fn fn, const char* what) {
  if (records.empty()) throw EmptyDataset(std::string(what) + " dataset is empty");
  double sum = 0.0;
  for (const auto& r : records) sum += fn(r);  // fixed order keeps aggregation deterministic
  return sum / static_cast<double>(records.size());
}

}  // namespace detail

inline double loss_reasoning(std::span<const ReasoningRecord> records, const LossWeights& w = {}) {
  return detail::mean_over(records, [&](const ReasoningRecord& r) { return loss_step(r, w); }, "reasoning");
}

inline double loss_final(std::span<const FinalRecord> records, const LossWeights& w = {}) {
  return detail::mean_over(records, [&](const FinalRecord& r) { return loss_plan(r, w); }, "final");
}

struct LossReport {
  std::vector<double> step_losses;
  std::vector<double> plan_losses;
  std::optional<double> l_reasoning;  // absent for an empty reasoning dataset
  std::optional<double> l_final;
  std::map<std::string, std::size_t> step_status_counts;
  std::map<std::string, std::size_t> error_class_counts;
};

inline LossReport compute_loss_report(std::span<const ReasoningRecord> reasoning, std::span<const FinalRecord> final,
                                      const LossWeights& w = {}) {
  LossReport report;
  for (const auto& r : reasoning) {
    report.step_losses.push_back(loss_step(r, w));
    ++report.step_status_counts[std::string(to_string(r.feedback.status))];
  }
  for (const auto& r : final) {
    report.plan_losses.push_back(loss_plan(r, w));
    ++report.error_class_counts[r.error_class ? std::string(to_string(*r.error_class)) : "valid"];
  }
  if (!reasoning.empty()) report.l_reasoning = loss_reasoning(reasoning, w);
  if (!final.empty()) report.l_final = loss_final(final, w);
  return report;
}

inline json to_json(const LossReport& r) {
  json j;
  j["step_losses"] = r.step_losses;
  j["plan_losses"] = r.plan_losses;
  j["l_reasoning"] = r.l_reasoning ? json(*r.l_reasoning) : json(nullptr);
  j["l_final"] = r.l_final ? json(*r.l_final) : json(nullptr);
  j["step_status_counts"] = r.step_status_counts;
  j["error_class_counts"] = r.error_class_counts;
  return j;
}

}  // namespace pddl_instruct
