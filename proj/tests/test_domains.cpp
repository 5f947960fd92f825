#include <gtest/gtest.h>

#include "pddl_instruct/datagen.hpp"

using namespace pddl_instruct;

TEST(Domains, Shapes) {
  EXPECT_EQ(blocksworld_domain().actions.size(), 4u);
  EXPECT_EQ(blocksworld_domain().predicates.size(), 5u);
  EXPECT_EQ(logistics_domain().actions.size(), 6u);
  EXPECT_EQ(&blocksworld_domain(), &blocksworld_domain());
}

TEST(Generator, Deterministic) {
  for (auto kind : {DomainKind::blocksworld, DomainKind::mystery_blocksworld, DomainKind::logistics}) {
    Instance a = gen_instance(kind, {}, 5);
    Instance b = gen_instance(kind, {}, 5);
    EXPECT_EQ(a.problem, b.problem);
    EXPECT_EQ(a.domain, b.domain);
  }
  EXPECT_NE(gen_instance(DomainKind::blocksworld, {}, 5).problem, gen_instance(DomainKind::blocksworld, {}, 6).problem);
}

TEST(Generator, BlocksworldIsSolvableAndNontrivial) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Instance inst = gen_instance(DomainKind::blocksworld, {BlocksworldSize{2}, {}}, seed);
    EXPECT_EQ(inst.problem.objects.size(), 2u);
    EXPECT_FALSE(satisfies_goal(inst.problem.init, inst.problem.goal));
    EXPECT_TRUE(solve(inst.domain, inst.problem).solved());
  }
}

TEST(Generator, SmallLogistics) {
  LogisticsSize size{1, 2, 1, 1, 1};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Problem p = gen_logistics_problem(size, seed);
    SolveResult r = solve(logistics_domain(), p);
    ASSERT_TRUE(r.solved());
    EXPECT_LE(r.plan.size(), 4u);
  }
}

TEST(Generator, LogisticsSolvable) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = gen_instance(DomainKind::logistics, {}, seed);
    EXPECT_TRUE(solve(inst.domain, inst.problem).solved());
  }
}

TEST(Obfuscate, BijectiveAndSeeded) {
  Instance inst = gen_instance(DomainKind::blocksworld, {}, 3);
  Obfuscated a = obfuscate(inst.domain, inst.problem, 9);
  Obfuscated b = obfuscate(inst.domain, inst.problem, 9);
  EXPECT_EQ(a.renaming.objects, b.renaming.objects);
  EXPECT_EQ(a.renaming.predicates, b.renaming.predicates);
  std::set<std::string> images;
  for (const auto& [k, v] : a.renaming.objects) images.insert(v);
  EXPECT_EQ(images.size(), a.renaming.objects.size());
  Renaming back = a.renaming.inverse();
  EXPECT_EQ(back(a.problem), inst.problem);
  EXPECT_EQ(back(a.domain), inst.domain);
  std::string text = print_domain(a.domain) + print_problem(a.problem);
  for (const char* word : {"(on ", "(clear", "holding", "stack", "pick-up"}) {
    EXPECT_EQ(text.find(word), std::string::npos) << word;
  }
}

TEST(Obfuscate, PlansCarryOver) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = gen_instance(DomainKind::blocksworld, {}, seed);
    Obfuscated ob = obfuscate(inst.domain, inst.problem, seed);
    Plan plan = solve(inst.domain, inst.problem).plan;
    EXPECT_TRUE(validate_plan(ob.domain, ob.problem, ob.renaming(plan)).valid);
    EXPECT_EQ(solve(ob.domain, ob.problem).plan.size(), plan.size());
  }
}

TEST(ProblemSet, DistinctAndSerializable) {
  auto set = gen_problem_set({DomainKind::blocksworld, DomainKind::logistics}, {}, 6, 1);
  ASSERT_EQ(set.size(), 6u);
  std::set<std::string> ids;
  for (const auto& inst : set) {
    ids.insert(inst.id);
    Instance back = instance_from_json(to_json(inst));
    EXPECT_EQ(back.problem, inst.problem);
    EXPECT_EQ(back.kind, inst.kind);
  }
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(set[1].kind, DomainKind::logistics);
}
