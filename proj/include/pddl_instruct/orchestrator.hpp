#pragma once

// Generate -> validate -> re-prompt loop per problem, and campaigns over many
// problems. Weight updates are not performed here: each iteration's datasets
// and losses are written out and optionally announced to a trainer hook.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pddl_instruct/backend.hpp"
#include "pddl_instruct/config.hpp"
#include "pddl_instruct/domains.hpp"
#include "pddl_instruct/feedback.hpp"
#include "pddl_instruct/losses.hpp"
#include "pddl_instruct/prompts.hpp"
#include "pddl_instruct/records.hpp"

namespace pddl_instruct {

struct Attempt {
  std::size_t iteration = 1;
  std::string prompt;
  std::string completion;
  Assessment assessment;
  std::string feedback;  // text handed to the next prompt
  std::vector<ReasoningRecord> reasoning;
  FinalRecord final;
};

struct LoopResult {
  std::string problem_id;
  std::vector<Attempt> attempts;
  PlanVerdict final_verdict;
  std::optional<std::string> backend_failure;
  std::size_t model_calls = 0;

  bool solved() const { return final_verdict.valid; }
  std::size_t iterations() const { return attempts.size(); }
};

struct PromptSet {
  PromptTemplate generate = default_template(PromptKind::cot_generate);
  PromptTemplate binary = default_template(PromptKind::cot_feedback_binary);
  PromptTemplate detailed = default_template(PromptKind::cot_feedback_detailed);
};

namespace detail {

inline PlanVerdict backend_failure_verdict(const std::string& message) {
  PlanVerdict v;
  v.sequence_error = "backend failure: " + message;
  v.first_failure_index = 0;
  finish(v);
  return v;
}

/// One generate() with the loop-level retry allowance. Returns nullopt and
/// sets `failure` when every attempt raised.
inline std::optional<std::string> call_backend(ModelBackend& backend, const GenerationRequest& request,
                                               std::size_t max_retries, std::size_t& calls, std::string& failure) {
  for (std::size_t r = 0; r <= max_retries; ++r) {
    ++calls;
    try {
      return backend.generate(request);
    } catch (const BackendError& e) {
      failure = e.what();
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline LoopResult run_feedback_loop(ModelBackend& backend, const Instance& inst, const LoopConfig& cfg,
                                    const PromptSet& prompts = {}) {
  if (cfg.eta < 1) throw ConfigError("loop.eta", "must be at least 1");
  LoopResult result;
  result.problem_id = inst.id;
  const std::string domain_text = print_domain(inst.domain);
  const std::string problem_text = print_problem(inst.problem);

  for (std::size_t t = 1; t <= cfg.eta; ++t) {
    Attempt at;
    at.iteration = t;
    PromptBindings bindings{{"domain", domain_text}, {"problem", problem_text}};
    if (t == 1) {
      at.prompt = render_prompt(prompts.generate, bindings);
    } else {
      const Attempt& prev = result.attempts.back();
      bindings["prior_trace"] = prev.completion;
      bindings["feedback"] = prev.feedback;
      at.prompt = render_prompt(cfg.feedback_mode == FeedbackMode::binary ? prompts.binary : prompts.detailed, bindings);
    }

    GenerationRequest request{at.prompt, cfg.temperature, cfg.max_tokens, inst.id, t};
    std::string failure;
    auto completion = detail::call_backend(backend, request, cfg.max_retries, result.model_calls, failure);
    if (!completion) {
      result.backend_failure = failure;
      result.final_verdict = detail::backend_failure_verdict(failure);
      return result;
    }
    at.completion = std::move(*completion);
    at.assessment = assess_completion(inst.domain, inst.problem, at.completion);
    Plan plan;
    std::optional<double> v_hat;
    if (at.assessment.trace) {
      at.reasoning = build_reasoning_dataset(inst.id, t, inst.domain, inst.problem, *at.assessment.trace);
      plan = extract_plan(*at.assessment.trace);
      v_hat = claimed_validity(*at.assessment.trace);
    }
    at.final = make_final_record(inst.id, t, inst.domain, inst.problem, plan, at.assessment.verdict, v_hat, at.completion);
    at.feedback = render_feedback(at.assessment.verdict, cfg.feedback_mode).text;
    result.final_verdict = at.assessment.verdict;
    bool done = at.assessment.verdict.valid;
    result.attempts.push_back(std::move(at));
    if (done) break;
  }
  return result;
}

struct ProblemOutcome {
  std::string problem_id;
  bool valid = false;
  std::optional<ErrorClass> error_class;
  std::string trace;
};

struct IterationReport {
  std::size_t iteration = 1;
  std::vector<ProblemOutcome> outcomes;  // problems still unsolved at the start of this iteration
  std::size_t attempted = 0;
  std::size_t valid = 0;
  std::size_t solved_so_far = 0;  // cumulative over iterations 1..t
  std::map<std::string, std::size_t> error_counts;
  std::optional<double> l_reasoning;
  std::optional<double> l_final;
  std::vector<ReasoningRecord> d_reasoning;
  std::vector<FinalRecord> d_final;
};

struct ProblemSummary {
  std::string problem_id;
  bool solved = false;
  std::size_t iterations = 0;
  std::size_t model_calls = 0;
  std::optional<ErrorClass> final_error;
  std::optional<std::string> backend_failure;
};

struct CampaignReport {
  std::string backend;
  LoopConfig loop;
  std::size_t problems = 0;
  std::size_t solved = 0;
  double accuracy = 0.0;  // percent
  std::vector<IterationReport> iterations;
  std::vector<ProblemSummary> per_problem;
};

struct CampaignOptions {
  PromptSet prompts;
  LossWeights weights;
  /// Called once per iteration, after aggregation, in iteration order.
  std::function<void(const IterationReport&)> on_iteration;
};

inline std::vector<LoopResult> run_loops(ModelBackend& backend, const std::vector<Instance>& problems,
                                         const LoopConfig& cfg, const PromptSet& prompts) {
  std::vector<LoopResult> results(problems.size());
  std::size_t workers = backend.concurrent_safe() ? std::max<std::size_t>(1, cfg.concurrency) : 1;
  workers = std::min(workers, problems.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      try {
        results[i] = run_feedback_loop(backend, problems[i], cfg, prompts);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

inline CampaignReport run_campaign(ModelBackend& backend, const std::vector<Instance>& problems, const LoopConfig& cfg,
                                   const CampaignOptions& options = {}) {
  if (problems.empty()) throw Error("campaign needs at least one problem");
  std::vector<LoopResult> results = run_loops(backend, problems, cfg, options.prompts);
  std::sort(results.begin(), results.end(),
            [](const LoopResult& a, const LoopResult& b) { return a.problem_id < b.problem_id; });

  CampaignReport report;
  report.backend = backend.identity();
  report.loop = cfg;
  report.problems = results.size();
  std::size_t max_t = 0;
  for (const auto& r : results) max_t = std::max(max_t, r.iterations());

  std::size_t solved = 0;
  for (std::size_t t = 1; t <= max_t; ++t) {
    IterationReport it;
    it.iteration = t;
    for (const auto& r : results) {
      if (r.iterations() < t) continue;
      const Attempt& a = r.attempts[t - 1];
      ProblemOutcome o{r.problem_id, a.assessment.verdict.valid, a.assessment.verdict.error_class, a.completion};
      ++it.attempted;
      if (o.valid) {
        ++it.valid;
        ++solved;
      } else {
        ++it.error_counts[std::string(to_string(*o.error_class))];
      }
      it.outcomes.push_back(std::move(o));
      it.d_reasoning.insert(it.d_reasoning.end(), a.reasoning.begin(), a.reasoning.end());
      it.d_final.push_back(a.final);
    }
    it.solved_so_far = solved;
    if (!it.d_reasoning.empty()) it.l_reasoning = loss_reasoning(it.d_reasoning, options.weights);
    if (!it.d_final.empty()) it.l_final = loss_final(it.d_final, options.weights);
    if (options.on_iteration) options.on_iteration(it);
    report.iterations.push_back(std::move(it));
  }

  for (const auto& r : results) {
    ProblemSummary s{r.problem_id, r.solved(), r.iterations(), r.model_calls, r.final_verdict.error_class,
                     r.backend_failure};
    report.per_problem.push_back(std::move(s));
  }
  report.solved = solved;
  report.accuracy = 100.0 * static_cast<double>(solved) / static_cast<double>(report.problems);
  return report;
}

inline json to_json(const CampaignReport& r) {
  json j;
  j["schema"] = kSchemaVersion;
  j["backend"] = r.backend;
  j["loop"] = {{"eta", r.loop.eta},
               {"feedback_mode", to_string(r.loop.feedback_mode)},
               {"temperature", r.loop.temperature},
               {"max_tokens", r.loop.max_tokens},
               {"max_retries", r.loop.max_retries},
               {"concurrency", r.loop.concurrency},
               {"reasoning_epochs", r.loop.reasoning_epochs},
               {"final_epochs", r.loop.final_epochs}};
  j["problems"] = r.problems;
  j["solved"] = r.solved;
  j["accuracy"] = r.accuracy;
  j["iterations"] = json::array();
  for (const auto& it : r.iterations) {
    json ij{{"iteration", it.iteration},
            {"attempted", it.attempted},
            {"valid", it.valid},
            {"solved_so_far", it.solved_so_far},
            {"cumulative_accuracy", 100.0 * static_cast<double>(it.solved_so_far) / static_cast<double>(r.problems)},
            {"error_counts", it.error_counts},
            {"reasoning_records", it.d_reasoning.size()},
            {"final_records", it.d_final.size()}};
    ij["l_reasoning"] = it.l_reasoning ? json(*it.l_reasoning) : json(nullptr);
    ij["l_final"] = it.l_final ? json(*it.l_final) : json(nullptr);
    j["iterations"].push_back(std::move(ij));
  }
  j["per_problem"] = json::array();
  for (const auto& p : r.per_problem) {
    json pj{{"problem_id", p.problem_id}, {"solved", p.solved}, {"iterations", p.iterations},
            {"model_calls", p.model_calls}};
    pj["final_error"] = p.final_error ? json(to_string(*p.final_error)) : json(nullptr);
    pj["backend_failure"] = p.backend_failure ? json(*p.backend_failure) : json(nullptr);
    j["per_problem"].push_back(std::move(pj));
  }
  return j;
}

/// Writes <dir>/iter-NN/{reasoning,final}.jsonl and returns the manifest
/// describing them (the payload a trainer hook receives).
inline json write_iteration(const std::filesystem::path& dir, const IterationReport& it, const LoopConfig& cfg) {
  char name[32];
  std::snprintf(name, sizeof name, "iter-%02zu", it.iteration);
  std::filesystem::path sub = dir / name;
  std::filesystem::create_directories(sub);
  write_jsonl((sub / "reasoning.jsonl").string(), it.d_reasoning);
  write_jsonl((sub / "final.jsonl").string(), it.d_final);
  json m{{"schema", kSchemaVersion},
         {"iteration", it.iteration},
         {"reasoning", (sub / "reasoning.jsonl").string()},
         {"final", (sub / "final.jsonl").string()},
         {"reasoning_records", it.d_reasoning.size()},
         {"final_records", it.d_final.size()},
         {"reasoning_epochs", cfg.reasoning_epochs},
         {"final_epochs", cfg.final_epochs}};
  m["l_reasoning"] = it.l_reasoning ? json(*it.l_reasoning) : json(nullptr);
  m["l_final"] = it.l_final ? json(*it.l_final) : json(nullptr);
  return m;
}

}  // namespace pddl_instruct
