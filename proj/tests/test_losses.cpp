#include <gtest/gtest.h>

#include <cmath>

#include "pddl_instruct/datagen.hpp"
#include "pddl_instruct/losses.hpp"

using namespace pddl_instruct;

namespace {

ReasoningRecord step_record(StepStatus status, State claimed, State expected) {
  ReasoningRecord r;
  r.problem_id = "p";
  r.s_claimed = std::move(claimed);
  r.feedback.status = status;
  r.feedback.expected_state = std::move(expected);
  return r;
}

FinalRecord final_record(int v, double v_hat) {
  FinalRecord r;
  r.problem_id = "p";
  r.v = v;
  r.v_hat = v_hat;
  return r;
}

}  // namespace

TEST(Losses, FeedbackWeights) {
  EXPECT_EQ(loss_feedback(StepStatus::valid), 0.0);
  EXPECT_EQ(loss_feedback(StepStatus::precondition_violation), 1.0);
  EXPECT_EQ(loss_feedback(StepStatus::effect_mismatch), 1.0);
  EXPECT_EQ(loss_feedback(StepStatus::goal_failure), 1.5);
}

TEST(Losses, StepLoss) {
  State expected{{"clear", {"a"}}, {"handempty"}};
  State claimed{{"clear", {"b"}}, {"handempty"}};
  EXPECT_NEAR(loss_step(step_record(StepStatus::effect_mismatch, claimed, expected)), 2.1, 1e-12);
  EXPECT_NEAR(loss_step(step_record(StepStatus::goal_failure, expected, expected)), 0.15, 1e-12);
  EXPECT_EQ(loss_step(step_record(StepStatus::valid, expected, expected)), 0.0);
}

TEST(Losses, BceAndPlanLoss) {
  EXPECT_NEAR(bce(1, 0.5), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce(0, 0.5), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce(1, 0.9), 0.1053605, 1e-7);
  EXPECT_NEAR(bce(1, 0.0), -std::log(1e-6), 1e-9);  // clamped, finite
  EXPECT_NEAR(loss_plan(0, 0.5), 2.3465736, 1e-7);
  EXPECT_NEAR(loss_plan(1, 0.9), 0.0526803, 1e-7);
  LossWeights w;
  w.beta = 4.0;
  EXPECT_NEAR(loss_plan(0, 0.5, w), 4.3465736, 1e-7);
}

TEST(Losses, DatasetMeans) {
  State expected{{"clear", {"a"}}, {"handempty"}};
  State claimed{{"clear", {"b"}}, {"handempty"}};
  std::vector<ReasoningRecord> steps{step_record(StepStatus::effect_mismatch, claimed, expected),
                                     step_record(StepStatus::valid, expected, expected)};
  EXPECT_NEAR(loss_reasoning(steps), 1.05, 1e-12);
  std::vector<FinalRecord> plans{final_record(0, 0.5), final_record(1, 1.0)};
  EXPECT_NEAR(loss_final(plans), 1.1732868, 1e-6);
  EXPECT_THROW(loss_reasoning(std::vector<ReasoningRecord>{}), EmptyDataset);
  EXPECT_THROW(loss_final(std::vector<FinalRecord>{}), EmptyDataset);

  LossReport report = compute_loss_report(steps, {});
  EXPECT_TRUE(report.l_reasoning);
  EXPECT_FALSE(report.l_final);
  EXPECT_EQ(report.step_status_counts.at("effect_mismatch"), 1u);
  EXPECT_TRUE(to_json(report)["l_final"].is_null());
}

TEST(Losses, ZeroExactlyForCorrectValidSteps) {
  // Records built from genuine traces: a step's loss is zero iff it is valid
  // and its claimed state matches.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Instance inst = gen_instance(DomainKind::blocksworld, {}, seed);
    Plan plan = solve(inst.domain, inst.problem).plan;
    CoTTrace t = simulate_trace(inst.domain, inst.problem, plan);
    for (const auto& r : build_reasoning_dataset(inst.id, 1, inst.domain, inst.problem, t)) {
      EXPECT_EQ(loss_step(r), 0.0);
    }
    CorruptedPlan c = corrupt_plan(inst.domain, inst.problem, plan, CorruptionKind::effect_misapplied, seed);
    auto bad = build_reasoning_dataset(inst.id, 1, inst.domain, inst.problem, *c.trace);
    bool any_positive = false;
    for (const auto& r : bad) {
      bool zero = loss_step(r) == 0.0;
      EXPECT_EQ(zero, r.feedback.valid() && r.s_claimed == r.feedback.expected_state);
      any_positive = any_positive || !zero;
    }
    EXPECT_TRUE(any_positive);
  }
}
