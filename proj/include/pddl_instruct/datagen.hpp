#pragma once

// Instruction-data generation: plan corruption, Phase-1 records and the
// problem-level dataset split.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pddl_instruct/domains.hpp"
#include "pddl_instruct/feedback.hpp"
#include "pddl_instruct/planner.hpp"
#include "pddl_instruct/records.hpp"
#include "pddl_instruct/trace.hpp"
#include "pddl_instruct/validator.hpp"

namespace pddl_instruct {

enum class CorruptionKind { precondition_unsatisfied, effect_misapplied, frame_violation, goal_not_reached };

inline constexpr CorruptionKind kAllCorruptions[] = {CorruptionKind::precondition_unsatisfied,
                                                     CorruptionKind::effect_misapplied, CorruptionKind::frame_violation,
                                                     CorruptionKind::goal_not_reached};

inline Phase1Label label_of(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::precondition_unsatisfied: return Phase1Label::precondition_unsatisfied;
    case CorruptionKind::effect_misapplied: return Phase1Label::effect_misapplied;
    case CorruptionKind::frame_violation: return Phase1Label::frame_violation;
    case CorruptionKind::goal_not_reached: return Phase1Label::goal_not_reached;
  }
  return Phase1Label::correct;
}

inline std::string_view to_string(CorruptionKind k) { return to_string(label_of(k)); }

inline ErrorClass expected_error_class(CorruptionKind k) { return *expected_error_class(label_of(k)); }

class Uncorruptible : public Error {
 public:
  using Error::Error;
};

/// Kinds 1 and 4 change the action sequence; kinds 2 and 3 keep it and
/// corrupt the accompanying trace.
struct CorruptedPlan {
  CorruptionKind kind;
  Plan plan;
  std::optional<CoTTrace> trace;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[pick(rng, i)]);
  return idx;
}

inline std::vector<State> state_sequence(const Domain& d, const Problem& p, const Plan& plan) {
  std::vector<State> states{p.init};
  for (const auto& ref : plan.steps) states.push_back(apply(states.back(), resolve(d, p, ref)));
  return states;
}

inline std::optional<Plan> swap_to_violation(const Domain& d, const Problem& p, const Plan& plan,
                                             std::mt19937_64& rng) {
  if (plan.size() < 2) return std::nullopt;
  for (auto i : shuffled_indices(plan.size() - 1, rng)) {
    Plan swapped = plan;
    std::swap(swapped.steps[i], swapped.steps[i + 1]);
    auto v = validate_plan(d, p, swapped);
    if (!v.valid && v.error_class == ErrorClass::precondition_violation) return swapped;
  }
  return std::nullopt;
}

inline std::optional<Plan> insert_violation(const Domain& d, const Problem& p, const Plan& plan,
                                            const std::vector<State>& states, std::mt19937_64& rng) {
  auto actions = ground(d, p);
  for (auto pos : shuffled_indices(plan.size() + 1, rng)) {
    std::vector<const GroundAction*> blocked;
    for (const auto& a : actions) {
      if (!applicable(states[pos], a)) blocked.push_back(&a);
    }
    if (blocked.empty()) continue;
    Plan out = plan;
    out.steps.insert(out.steps.begin() + static_cast<std::ptrdiff_t>(pos), blocked[pick(rng, blocked.size())]->ref);
    return out;
  }
  return std::nullopt;
}

/// Toggles `atom` in the result of step `i` and carries the change into the
/// next step's claimed starting state.
inline void toggle_result(CoTTrace& trace, std::size_t i, const Atom& atom) {
  State& result = trace.steps[i].s_next;
  if (!result.erase(atom)) result.insert(atom);
  if (i + 1 < trace.size()) trace.steps[i + 1].s_prev = result;
}

}  // namespace detail

/// Derives an invalid artifact of the given kind from a valid plan:
///  - precondition_unsatisfied: adjacent swap or insertion of an action whose
///    preconditions fail at its position;
///  - effect_misapplied: a trace step whose result drops an add effect or
///    keeps a deleted atom;
///  - frame_violation: a trace step whose result changes an atom the action
///    does not touch;
///  - goal_not_reached: a truncated plan that stops short of the goal.
/// Throws Uncorruptible when no such artifact exists.
inline CorruptedPlan corrupt_plan(const Domain& d, const Problem& p, const Plan& plan, CorruptionKind kind,
                                  std::uint64_t seed) {
  auto verdict = validate_plan(d, p, plan);
  if (!verdict.valid) throw ContractViolation("corrupt_plan needs a valid plan");
  std::mt19937_64 rng(seed);
  const auto states = detail::state_sequence(d, p, plan);
  CorruptedPlan out{kind, plan, std::nullopt};

  switch (kind) {
    case CorruptionKind::precondition_unsatisfied: {
      std::optional<Plan> bad;
      if (pick(rng, 2) == 0) bad = detail::swap_to_violation(d, p, plan, rng);
      if (!bad) bad = detail::insert_violation(d, p, plan, states, rng);
      if (!bad) throw Uncorruptible("every ground action is applicable everywhere");
      out.plan = std::move(*bad);
      return out;
    }
    case CorruptionKind::goal_not_reached: {
      std::vector<std::size_t> lengths;
      for (std::size_t k = 0; k < plan.size(); ++k) {
        if (!satisfies_goal(states[k], p.goal)) lengths.push_back(k);
      }
      if (lengths.empty()) throw Uncorruptible("no proper prefix of the plan misses the goal");
      out.plan.steps.resize(lengths[pick(rng, lengths.size())]);
      return out;
    }
    case CorruptionKind::effect_misapplied: {
      CoTTrace trace = simulate_trace(d, p, plan);
      std::vector<std::pair<std::size_t, Atom>> candidates;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        auto a = resolve(d, p, trace.steps[i].action);
        for (const auto& atom : a.add) candidates.emplace_back(i, atom);
        for (const auto& atom : a.del) {
          if (std::find(a.add.begin(), a.add.end(), atom) == a.add.end()) candidates.emplace_back(i, atom);
        }
      }
      if (candidates.empty()) throw Uncorruptible("plan has no effects to misapply");
      const auto& [i, atom] = candidates[pick(rng, candidates.size())];
      detail::toggle_result(trace, i, atom);
      out.trace = std::move(trace);
      return out;
    }
    case CorruptionKind::frame_violation: {
      CoTTrace trace = simulate_trace(d, p, plan);
      if (trace.empty()) throw Uncorruptible("empty plan has no frame to violate");
      auto universe = ground_atoms(d, p.objects);
      std::vector<std::pair<std::size_t, Atom>> candidates;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        auto a = resolve(d, p, trace.steps[i].action);
        for (const auto& atom : universe) {
          bool touched = std::find(a.add.begin(), a.add.end(), atom) != a.add.end() ||
                         std::find(a.del.begin(), a.del.end(), atom) != a.del.end();
          if (!touched) candidates.emplace_back(i, atom);
        }
      }
      if (candidates.empty()) throw Uncorruptible("every atom is touched by every action");
      const auto& [i, atom] = candidates[pick(rng, candidates.size())];
      detail::toggle_result(trace, i, atom);
      out.trace = std::move(trace);
      return out;
    }
  }
  return out;
}

/// Validates a corrupted artifact the way its kind requires.
inline PlanVerdict validate_corruption(const Domain& d, const Problem& p, const CorruptedPlan& c) {
  return c.trace ? validate_trace(d, p, *c.trace) : validate_plan(d, p, c.plan);
}

/// Splits `total` items by `ratios`: floor of each share, then leftovers one
/// at a time to the largest ratios first (ties to the earlier entry).
inline std::vector<std::size_t> allocate_counts(std::size_t total, const std::vector<double>& ratios) {
  std::vector<std::size_t> counts(ratios.size(), 0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(ratios[i] * static_cast<double>(total) + 1e-9));
    used += counts[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratios[a] > ratios[b]; });
  for (std::size_t k = 0; used < total && !order.empty(); ++k, ++used) ++counts[order[k % order.size()]];
  return counts;
}

inline void check_ratios(const std::vector<double>& ratios, std::string_view what) {
  double sum = 0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(std::string(what) + " must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw Error(std::string(what) + " must sum to 1");
}

/// Proportions over the five Phase-1 labels, in kAllPhase1Labels order.
using LabelMix = std::array<double, 5>;

struct Phase1Options {
  std::vector<DomainKind> domains{DomainKind::blocksworld};
  GeneratorSizes sizes;
  std::size_t count = 40;
  LabelMix mix{0.5, 0.125, 0.125, 0.125, 0.125};
  std::uint64_t seed = 0;
  SearchLimits limits;
};

/// Builds one Phase-1 record of the requested label for `inst`, or nothing
/// when the instance cannot carry that label.
inline std::optional<Phase1Record> make_phase1_record(const Instance& inst, Phase1Label label, std::uint64_t seed,
                                                      const SearchLimits& limits = {}) {
  auto solved = solve(inst.domain, inst.problem, limits);
  if (!solved.solved()) return std::nullopt;
  Phase1Record r;
  r.id = inst.id;
  r.domain = print_domain(inst.domain);
  r.problem = print_problem(inst.problem);
  r.label = label;
  PlanVerdict verdict;
  if (label == Phase1Label::correct) {
    r.plan = print_plan(solved.plan);
    r.trace = render_trace(simulate_trace(inst.domain, inst.problem, solved.plan));
    verdict = validate_plan(inst.domain, inst.problem, solved.plan);
  } else {
    CorruptionKind kind{};
    for (auto k : kAllCorruptions) {
      if (label_of(k) == label) kind = k;
    }
    CorruptedPlan bad;
    try {
      bad = corrupt_plan(inst.domain, inst.problem, solved.plan, kind, seed);
    } catch (const Uncorruptible&) {
      return std::nullopt;
    }
    r.plan = print_plan(bad.plan);
    if (bad.trace) r.trace = render_trace(*bad.trace);
    verdict = validate_corruption(inst.domain, inst.problem, bad);
  }
  r.explanation = render_feedback(verdict, FeedbackMode::detailed).text;
  return r;
}

/// Label counts follow `mix` via allocate_counts; labels are interleaved by a
/// seeded shuffle and domains assigned round-robin.
inline std::vector<Phase1Record> make_phase1_dataset(const Phase1Options& opt) {
  std::vector<double> mix(opt.mix.begin(), opt.mix.end());
  check_ratios(mix, "label mix");
  if (opt.domains.empty()) throw Error("at least one domain is required");
  auto counts = allocate_counts(opt.count, mix);
  std::vector<Phase1Label> labels;
  for (std::size_t i = 0; i < counts.size(); ++i) labels.insert(labels.end(), counts[i], kAllPhase1Labels[i]);
  std::mt19937_64 rng(opt.seed);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[pick(rng, i)]);

  std::vector<Phase1Record> out;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    DomainKind kind = opt.domains[j % opt.domains.size()];
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error("could not generate a " + std::string(to_string(labels[j])) + " record");
      auto inst = gen_instance(kind, opt.sizes, rng());
      auto record = make_phase1_record(inst, labels[j], rng(), opt.limits);
      if (!record) continue;
      record->id += "#" + std::to_string(j);
      out.push_back(std::move(*record));
      break;
    }
  }
  return out;
}

/// Re-derives a Phase-1 record's verdict from its stored text fields.
inline PlanVerdict revalidate(const Phase1Record& r) {
  Domain d = parse_domain(r.domain);
  Problem p = parse_problem(r.problem, d);
  if (!r.trace.empty() && (r.label == Phase1Label::effect_misapplied || r.label == Phase1Label::frame_violation)) {
    return validate_trace(d, p, parse_trace(r.trace));
  }
  return validate_plan(d, p, parse_plan(r.plan));
}

struct SplitSpec {
  double d1 = 0.5;
  double d2 = 0.3;
  double test = 0.2;
  std::uint64_t seed = 0;
};

template <class Record>
struct Split {
  std::vector<Record> d1, d2, test;
};

/// Partitions by problem identity: groups of records sharing a key are
/// shuffled with the seed and whole groups allocated by allocate_counts.
template <class Record, class KeyFn>
Split<Record> split_dataset(const std::vector<Record>& records, const SplitSpec& spec, KeyFn key) {
  std::vector<double> ratios{spec.d1, spec.d2, spec.test};
  check_ratios(ratios, "split ratios");
  for (double r : ratios) {
    if (!(r > 0.0)) throw Error("split ratios must be positive");
  }
  std::vector<std::string> keys;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string k = key(records[i]);
    auto [it, inserted] = members.try_emplace(k);
    if (inserted) keys.push_back(k);
    it->second.push_back(i);
  }
  std::sort(keys.begin(), keys.end());
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[pick(rng, i)]);
  auto counts = allocate_counts(keys.size(), ratios);
  Split<Record> out;
  std::vector<Record>* parts[] = {&out.d1, &out.d2, &out.test};
  std::size_t next = 0;
  for (std::size_t part = 0; part < 3; ++part) {
    for (std::size_t c = 0; c < counts[part]; ++c, ++next) {
      for (auto i : members[keys[next]]) parts[part]->push_back(records[i]);
    }
  }
  return out;
}

/// Phase-1 records group by problem text.
inline Split<Phase1Record> split_dataset(const std::vector<Phase1Record>& records, const SplitSpec& spec) {
  return split_dataset(records, spec, [](const Phase1Record& r) { return r.problem; });
}

/// `count` distinct solvable problems (distinct by problem text), domains
/// taken round-robin from `kinds`.
inline std::vector<Instance> gen_problem_set(const std::vector<DomainKind>& kinds, const GeneratorSizes& sizes,
                                             std::size_t count, std::uint64_t seed, const SearchLimits& limits = {}) {
  if (kinds.empty()) throw Error("at least one domain is required");
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<Instance> out;
  for (std::size_t j = 0; j < count; ++j) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error("could not generate " + std::to_string(count) + " distinct problems");
      Instance inst = gen_instance(kinds[j % kinds.size()], sizes, rng());
      if (!seen.insert(print_problem(inst.problem)).second) continue;
      if (!solve(inst.domain, inst.problem, limits).solved()) continue;
      out.push_back(std::move(inst));
      break;
    }
  }
  return out;
}

inline json to_json(const Instance& inst) {
  return json{{"schema", kSchemaVersion},
              {"id", inst.id},
              {"kind", to_string(inst.kind)},
              {"domain", print_domain(inst.domain)},
              {"problem", print_problem(inst.problem)}};
}

inline Instance instance_from_json(const json& j) {
  detail::check_schema(j);
  Instance inst;
  inst.id = detail::get<std::string>(j, "id");
  auto kind = domain_kind_from_string(detail::get<std::string>(j, "kind"));
  if (!kind) throw SchemaError("unknown domain kind");
  inst.kind = *kind;
  inst.domain = parse_domain(detail::get<std::string>(j, "domain"));
  inst.problem = parse_problem(detail::get<std::string>(j, "problem"), inst.domain);
  return inst;
}

}  // namespace pddl_instruct
