#include <gtest/gtest.h>

#include "pddl_instruct/datagen.hpp"

using namespace pddl_instruct;

namespace {

const char* kTwoBlocks = R"((define (problem two)
  (:domain blocksworld)
  (:objects a b - block)
  (:init (ontable a) (ontable b) (clear a) (clear b) (handempty))
  (:goal (and (on a b)))))";

}  // namespace

TEST(ParseDomain, Minimal) {
  Domain d = parse_domain("(define (domain d) (:predicates (p)))");
  EXPECT_EQ(d.name, "d");
  EXPECT_EQ(d.predicates.size(), 1u);
  EXPECT_TRUE(d.actions.empty());
}

TEST(ParseDomain, Blocksworld) {
  Domain d = parse_domain(kBlocksworldPddl);
  EXPECT_EQ(d.predicates.size(), 5u);
  EXPECT_EQ(d.actions.size(), 4u);
  const ActionSchema* stack = d.find_action("stack");
  ASSERT_NE(stack, nullptr);
  EXPECT_EQ(stack->pre.size(), 2u);
  EXPECT_EQ(stack->del.size(), 2u);
  EXPECT_EQ(stack->add.size(), 3u);
}

TEST(ParseDomain, CaseInsensitiveAndComments) {
  Domain d = parse_domain("; header\n(DEFINE (Domain D) ; trailing\n (:PREDICATES (P ?x)))");
  EXPECT_EQ(d.name, "d");
  EXPECT_EQ(d.predicates.front().name, "p");
}

TEST(ParseDomain, RejectsUnsupported) {
  const char* when = R"((define (domain d) (:requirements :strips) (:predicates (p) (q))
    (:action a :parameters () :precondition (p) :effect (when (p) (q)))))";
  EXPECT_THROW(parse_domain(when), UnsupportedFeature);
  EXPECT_THROW(parse_domain("(define (domain d) (:requirements :adl) (:predicates (p)))"), UnsupportedFeature);
  const char* neg = R"((define (domain d) (:predicates (p))
    (:action a :parameters () :precondition (not (p)) :effect (p))))";
  EXPECT_THROW(parse_domain(neg), UnsupportedFeature);
  EXPECT_THROW(parse_domain("(define (domain d) (:functions (f)))"), UnsupportedFeature);
}

TEST(ParseDomain, ErrorsCarryPosition) {
  try {
    parse_domain("(define (domain d)\n  (:predicates (p ?x - nosuchtype)))");
    FAIL() << "expected an error";
  } catch (const UnknownType& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 2,", 0), 0u) << e.what();
  }
  EXPECT_THROW(parse_domain("(define (domain d)"), ParseError);
  EXPECT_THROW(parse_domain(R"((define (domain d) (:predicates (p ?x))
    (:action a :parameters (?x) :precondition (p ?y) :effect (p ?x))))"),
               ParseError);
  EXPECT_THROW(parse_domain(R"((define (domain d) (:predicates (p ?x))
    (:action a :parameters (?x) :precondition (p ?x ?x) :effect (p ?x))))"),
               ArityMismatch);
}

TEST(ParseProblem, TwoBlocks) {
  Problem p = parse_problem(kTwoBlocks, blocksworld_domain());
  EXPECT_EQ(p.init.size(), 5u);
  EXPECT_EQ(p.goal, (std::vector<Atom>{{"on", {"a", "b"}}}));
  EXPECT_EQ(p.objects.size(), 2u);
}

TEST(ParseProblem, Errors) {
  std::string undeclared = kTwoBlocks;
  undeclared.replace(undeclared.find("(on a b)"), 8, "(on a c)");
  EXPECT_THROW(parse_problem(undeclared, blocksworld_domain()), UndeclaredObject);
  std::string wrong_domain = kTwoBlocks;
  wrong_domain.replace(wrong_domain.find("(:domain blocksworld)"), 21, "(:domain logistics)");
  EXPECT_THROW(parse_problem(wrong_domain, blocksworld_domain()), ParseError);
}

TEST(ParseProblem, EmptyGoal) {
  Problem p = parse_problem(R"((define (problem e) (:domain blocksworld) (:objects a - block)
    (:init (handempty)) (:goal (and))))",
                            blocksworld_domain());
  EXPECT_TRUE(p.goal.empty());
}

TEST(ParsePlan, Basics) {
  Problem p = parse_problem(kTwoBlocks, blocksworld_domain());
  EXPECT_EQ(parse_plan("(pick-up a)\n(stack a b)", blocksworld_domain(), p).size(), 2u);
  EXPECT_EQ(parse_plan("", blocksworld_domain(), p).size(), 0u);
  EXPECT_EQ(parse_plan("; cost 0\n").size(), 0u);
  EXPECT_THROW(parse_plan("(pick-up a b)", blocksworld_domain(), p), ArityMismatch);
  EXPECT_THROW(parse_plan("(fly a)", blocksworld_domain(), p), UnknownAction);
  // The lenient form only checks syntax.
  EXPECT_EQ(parse_plan("(fly a)").steps.front().name, "fly");
}

TEST(Print, PlanAndState) {
  EXPECT_EQ(print_plan(Plan{}), "");
  Plan plan{{{"pick-up", {"a"}}, {"stack", {"a", "b"}}}};
  EXPECT_EQ(print_plan(plan), "(pick-up a)\n(stack a b)\n");
  Problem p = parse_problem(kTwoBlocks, blocksworld_domain());
  std::string once = print_problem(p);
  EXPECT_EQ(print_problem(parse_problem(once, blocksworld_domain())), once);
  EXPECT_LT(once.find("(clear a)"), once.find("(ontable a)"));
}

TEST(RoundTrip, GeneratedDomainsProblemsPlans) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (auto kind : {DomainKind::blocksworld, DomainKind::mystery_blocksworld, DomainKind::logistics}) {
      Instance inst = gen_instance(kind, {}, seed);
      Domain d = parse_domain(print_domain(inst.domain));
      EXPECT_EQ(d, inst.domain);
      EXPECT_EQ(parse_problem(print_problem(inst.problem), d), inst.problem);
      Plan walk = random_walk(inst.domain, inst.problem, 5, seed);
      EXPECT_EQ(parse_plan(print_plan(walk), d, inst.problem), walk);
    }
  }
}

TEST(ParseAtoms, List) {
  EXPECT_EQ(parse_atoms("(on a b) (handempty)"), (std::vector<Atom>{{"on", {"a", "b"}}, {"handempty"}}));
  EXPECT_THROW(parse_atoms("(on a (b))"), ParseError);
}
