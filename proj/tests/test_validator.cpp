#include <gtest/gtest.h>

#include "pddl_instruct/datagen.hpp"
#include "support/oracle.hpp"

using namespace pddl_instruct;

namespace {

Problem two_blocks(std::vector<Atom> goal) {
  Problem p;
  p.name = "two";
  p.domain_name = "blocksworld";
  p.objects = {{"a", "block"}, {"b", "block"}};
  p.init = State{{"ontable", {"a"}}, {"ontable", {"b"}}, {"clear", {"a"}}, {"clear", {"b"}}, {"handempty"}};
  p.goal = std::move(goal);
  return p;
}

const State kHolding{{"holding", {"a"}}};
const State kReady{{"ontable", {"a"}}, {"clear", {"a"}}, {"handempty"}};

}  // namespace

TEST(ValidateStep, Valid) {
  const Domain& d = blocksworld_domain();
  Problem p = two_blocks({});
  EXPECT_EQ(validate_step(d, p, kReady, {"pick-up", {"a"}}, kHolding).status, StepStatus::valid);
}

TEST(ValidateStep, MissingPreconditionsInSchemaOrder) {
  const Domain& d = blocksworld_domain();
  Problem p = two_blocks({});
  StepVerdict v = validate_step(d, p, kReady, {"stack", {"a", "b"}}, kReady);
  EXPECT_EQ(v.status, StepStatus::precondition_violation);
  EXPECT_EQ(v.missing_preconditions, (std::vector<Atom>{{"holding", {"a"}}, {"clear", {"b"}}}));
  EXPECT_EQ(v.expected_state, kReady);
}

TEST(ValidateStep, EffectMismatch) {
  const Domain& d = blocksworld_domain();
  Problem p = two_blocks({});
  State claimed = kHolding;
  claimed.insert({"handempty"});
  StepVerdict v = validate_step(d, p, kReady, {"pick-up", {"a"}}, claimed);
  EXPECT_EQ(v.status, StepStatus::effect_mismatch);
  EXPECT_EQ(v.state_diff.extra, (State{{"handempty"}}));
  EXPECT_TRUE(v.state_diff.missing.empty());
}

TEST(ValidateStep, GoalOnlyOnFinalStep) {
  const Domain& d = blocksworld_domain();
  Problem p = two_blocks({{"on", {"a", "b"}}});
  EXPECT_EQ(validate_step(d, p, kReady, {"pick-up", {"a"}}, kHolding, &p.goal, false).status, StepStatus::valid);
  StepVerdict last = validate_step(d, p, kReady, {"pick-up", {"a"}}, kHolding, &p.goal, true);
  EXPECT_EQ(last.status, StepStatus::goal_failure);
  EXPECT_EQ(last.unmet_goals, p.goal);
}

TEST(ValidatePlan, EmptyPlans) {
  const Domain& d = blocksworld_domain();
  EXPECT_TRUE(validate_plan(d, two_blocks({{"clear", {"a"}}}), Plan{}).valid);
  PlanVerdict v = validate_plan(d, two_blocks({{"on", {"a", "b"}}}), Plan{});
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.error_class, ErrorClass::goal_not_achieved);
  EXPECT_EQ(detailed_text(v), "invalid: goal_not_achieved\nstep 0: goal not achieved: unmet goals: (on a b)");
}

TEST(ValidatePlan, OptimalTwoBlockPlan) {
  Plan plan{{{"pick-up", {"b"}}, {"stack", {"b", "a"}}}};
  PlanVerdict v = validate_plan(blocksworld_domain(), two_blocks({{"on", {"b", "a"}}}), plan);
  EXPECT_TRUE(v.valid);
  EXPECT_FALSE(v.error_class);
  EXPECT_EQ(v.plan_length, 2u);
}

TEST(ValidatePlan, StopsAtFirstFailure) {
  Plan plan{{{"pick-up", {"a"}}, {"pick-up", {"b"}}, {"fly", {}}}};
  PlanVerdict v = validate_plan(blocksworld_domain(), two_blocks({{"on", {"b", "a"}}}), plan);
  EXPECT_EQ(v.first_failure_index, 2u);
  EXPECT_EQ(v.per_step.size(), 2u);
  EXPECT_EQ(classify_error(v), ErrorClass::precondition_violation);
}

TEST(ValidatePlan, UnknownActionIsInvalidSequence) {
  Plan plan{{{"teleport", {"a"}}}};
  PlanVerdict v = validate_plan(blocksworld_domain(), two_blocks({{"on", {"b", "a"}}}), plan);
  EXPECT_EQ(v.error_class, ErrorClass::invalid_sequence);
  EXPECT_EQ(v.first_failure_index, 1u);
  EXPECT_NE(detailed_text(v).find("step 1: invalid action sequence:"), std::string::npos);
}

TEST(ClassifyError, ContractAndPrecedence) {
  PlanVerdict ok;
  ok.valid = true;
  EXPECT_THROW(classify_error(ok), ContractViolation);
  PlanVerdict both;
  StepVerdict effect;
  effect.status = StepStatus::effect_mismatch;
  StepVerdict pre;
  pre.status = StepStatus::precondition_violation;
  both.per_step = {effect, pre};
  EXPECT_EQ(classify_error(both), ErrorClass::precondition_violation);
  both.sequence_error = "x";
  EXPECT_EQ(classify_error(both), ErrorClass::invalid_sequence);
}

TEST(Feedback, DetailedPreconditionLine) {
  Problem p = two_blocks({{"on", {"a", "b"}}});
  p.objects.push_back({"c", "block"});
  p.init.insert({"ontable", {"c"}});
  p.init.insert({"clear", {"c"}});
  Plan plan{{{"pick-up", {"c"}}, {"put-down", {"c"}}, {"stack", {"a", "b"}}}};
  PlanVerdict v = validate_plan(blocksworld_domain(), p, plan);
  std::string text = render_feedback(v, FeedbackMode::detailed).text;
  EXPECT_NE(text.find("step 3: action (stack a b): missing preconditions: (holding a)"), std::string::npos) << text;
  EXPECT_EQ(render_feedback(v, FeedbackMode::binary).text, "invalid");
  PlanVerdict good = validate_plan(blocksworld_domain(), two_blocks({}), Plan{});
  EXPECT_EQ(render_feedback(good, FeedbackMode::binary).text, "valid");
}

TEST(Feedback, EffectLine) {
  const Domain& d = blocksworld_domain();
  Problem p = two_blocks({});
  State claimed = kHolding;
  claimed.insert({"handempty"});
  StepVerdict v = validate_step(d, p, kReady, {"pick-up", {"a"}}, claimed);
  v.index = 1;
  EXPECT_EQ(render_feedback(v, FeedbackMode::detailed).text,
            "step 1: action (pick-up a): incorrect effects: missing atoms: none; unexpected atoms: (handempty)");
}

// ---- traces -----------------------------------------------------------------

namespace {

struct Fixture {
  Instance inst = gen_instance(DomainKind::blocksworld, {}, 11);
  Plan plan = solve(inst.domain, inst.problem).plan;
  CoTTrace trace = simulate_trace(inst.domain, inst.problem, plan);
};

}  // namespace

TEST(Trace, RenderParseRoundTrip) {
  Fixture f;
  f.trace.declared_valid = true;
  f.trace.confidence = 0.85;
  f.trace.steps[0].justification = "hand is empty";
  std::string text = render_trace(f.trace);
  EXPECT_EQ(parse_trace(text), f.trace);
  EXPECT_EQ(render_trace(parse_trace(text)), text);
}

TEST(Trace, EmptyTraceHasFooterOnly) {
  CoTTrace t;
  t.declared_valid = false;
  EXPECT_EQ(render_trace(t), "VALID: no\n");
  EXPECT_TRUE(parse_trace(render_trace(t)).empty());
}

TEST(Trace, IgnoresCommentary) {
  Fixture f;
  std::string text = render_trace(f.trace);
  std::string noisy = "Let me think about this carefully.\n";
  std::size_t pos = 0;
  while ((pos = text.find("ACTION:", pos)) != std::string::npos) {
    text.insert(pos, "First I check the preconditions.\n");
    pos += 40;
  }
  noisy += text + "That should do it.\n";
  EXPECT_EQ(parse_trace(noisy), f.trace);
}

TEST(Trace, ToleratesMarkdown) {
  CoTTrace t = parse_trace("**STATE:** {(p)}\n- `ACTION:` (a)\n> RESULT: {(q)}\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.steps[0].action.name, "a");
}

TEST(Trace, MissingResult) {
  try {
    parse_trace("STATE: {(p)}\nACTION: (a)\nSTATE: {(q)}\nACTION: (b)\nRESULT: {(r)}\n");
    FAIL();
  } catch (const MissingField& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.field(), "RESULT");
  }
}

TEST(Trace, ClaimedValidity) {
  EXPECT_EQ(claimed_validity(parse_trace("VALID: yes\n")), 0.99);
  EXPECT_EQ(claimed_validity(parse_trace("VALID: no\n")), 0.01);
  EXPECT_EQ(claimed_validity(parse_trace("VALID: no\nCONFIDENCE: 1.0\n")), 0.99);
  EXPECT_EQ(claimed_validity(parse_trace("CONFIDENCE: 0.4\n")), 0.4);
  EXPECT_FALSE(claimed_validity(parse_trace("STATE: {}\nACTION: (a)\nRESULT: {}\n")));
}

TEST(Trace, ExtractPlan) {
  Fixture f;
  EXPECT_EQ(extract_plan(f.trace), f.plan);
  EXPECT_TRUE(extract_plan(CoTTrace{}).empty());
}

TEST(Coherence, OracleAndMutation) {
  Fixture f;
  ASSERT_GE(f.trace.size(), 2u);
  EXPECT_FALSE(check_coherence(f.trace, f.inst.domain, f.inst.problem));
  EXPECT_FALSE(check_coherence(CoTTrace{}, f.inst.domain, f.inst.problem));
  CoTTrace bad = f.trace;
  bad.steps[1].s_next.insert({"clear", {"zz"}});
  EXPECT_EQ(check_coherence(bad, f.inst.domain, f.inst.problem), 2u);
}

TEST(ValidateTrace, OracleTraceIsValid) {
  Fixture f;
  EXPECT_TRUE(validate_trace(f.inst.domain, f.inst.problem, f.trace).valid);
}

TEST(ValidateTrace, MisstatedStateIsIncorrectEffect) {
  Fixture f;
  ASSERT_GE(f.trace.size(), 2u);
  CoTTrace bad = f.trace;
  Atom extra{"clear", {bad.steps[0].action.args[0]}};
  if (!bad.steps[0].s_next.erase(extra)) bad.steps[0].s_next.insert(extra);
  bad.steps[1].s_prev = bad.steps[0].s_next;
  PlanVerdict v = validate_trace(f.inst.domain, f.inst.problem, bad);
  EXPECT_EQ(v.error_class, ErrorClass::incorrect_effect);
  EXPECT_EQ(v.first_failure_index, 1u);
}

TEST(ValidateTrace, BrokenChaining) {
  Fixture f;
  ASSERT_GE(f.trace.size(), 2u);
  CoTTrace bad = f.trace;
  bad.steps[1].s_prev.insert({"clear", {"zz"}});
  PlanVerdict v = validate_trace(f.inst.domain, f.inst.problem, bad);
  EXPECT_EQ(v.error_class, ErrorClass::invalid_sequence);
  EXPECT_EQ(v.first_failure_index, 2u);
}

TEST(ValidatePlan, AgreesWithOracleOnRandomSequences) {
  for (auto kind : {DomainKind::blocksworld, DomainKind::logistics}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Instance inst = gen_instance(kind, {}, seed);
      auto actions = ground(inst.domain, inst.problem);
      std::mt19937_64 rng(seed);
      Plan plan = random_walk(inst.domain, inst.problem, 3, seed);
      plan.steps.push_back(actions[pick(rng, actions.size())].ref);
      PlanVerdict v = validate_plan(inst.domain, inst.problem, plan);
      oracle::Run r = oracle::simulate(inst.domain, inst.problem, plan.steps);
      EXPECT_EQ(v.valid, r.outcome == oracle::Outcome::valid);
      if (!v.valid) {
        EXPECT_EQ(v.first_failure_index.value_or(0), r.failed_at);
      }
    }
  }
}
