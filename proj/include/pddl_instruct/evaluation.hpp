#pragma once

// Test-set evaluation: one generation per problem, no feedback, and the
// failure breakdown by error class.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pddl_instruct/backend.hpp"
#include "pddl_instruct/domains.hpp"
#include "pddl_instruct/prompts.hpp"
#include "pddl_instruct/records.hpp"

namespace pddl_instruct {

struct EvalOptions {
  double temperature = 0.3;
  std::size_t max_tokens = 2048;
  std::size_t concurrency = 1;
};

struct EvalOutcome {
  std::string problem_id;
  bool valid = false;
  std::optional<ErrorClass> error_class;
  bool backend_failure = false;
  std::string detail;  // first failure in detailed form, or the backend error

  friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

struct EvalResult {
  std::string domain;
  std::size_t total = 0;
  std::size_t valid = 0;
  std::size_t backend_failures = 0;
  std::map<ErrorClass, std::size_t> class_counts;
  std::vector<EvalOutcome> outcomes;  // sorted by problem id

  double accuracy() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(valid) / static_cast<double>(total); }
  double percent(ErrorClass c) const {
    auto it = class_counts.find(c);
    std::size_t n = it == class_counts.end() ? 0 : it->second;
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(total);
  }
  double failure_rate() const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(total - valid) / static_cast<double>(total);
  }

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

namespace detail {

inline std::string domain_label(const std::vector<Instance>& problems) {
  std::string name(to_string(problems.front().kind));
  for (const auto& p : problems) {
    if (to_string(p.kind) != name) return "mixed";
  }
  return name;
}

inline EvalOutcome evaluate_one(ModelBackend& backend, const Instance& inst, const EvalOptions& opt) {
  EvalOutcome o;
  o.problem_id = inst.id;
  std::string prompt = render_prompt(default_template(PromptKind::cot_generate),
                                     {{"domain", print_domain(inst.domain)}, {"problem", print_problem(inst.problem)}});
  std::string completion;
  try {
    completion = backend.generate({prompt, opt.temperature, opt.max_tokens, inst.id, 1});
  } catch (const BackendError& e) {
    o.backend_failure = true;
    o.error_class = ErrorClass::invalid_sequence;
    o.detail = e.what();
    return o;
  }
  PlanVerdict v = assess_completion(inst.domain, inst.problem, completion).verdict;
  o.valid = v.valid;
  o.error_class = v.error_class;
  if (!v.valid) o.detail = detailed_text(v);
  return o;
}

}  // namespace detail

/// Exactly one backend call per problem; nothing is fed back to the model.
inline EvalResult evaluate(ModelBackend& backend, const std::vector<Instance>& problems, const EvalOptions& opt = {}) {
  if (problems.empty()) throw Error("evaluation needs at least one problem");
  std::vector<EvalOutcome> outcomes(problems.size());
  std::size_t workers = backend.concurrent_safe() ? std::max<std::size_t>(1, opt.concurrency) : 1;
  workers = std::min(workers, problems.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      try {
        outcomes[i] = detail::evaluate_one(backend, problems[i], opt);
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

  std::sort(outcomes.begin(), outcomes.end(),
            [](const EvalOutcome& a, const EvalOutcome& b) { return a.problem_id < b.problem_id; });
  EvalResult r;
  r.domain = detail::domain_label(problems);
  r.total = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.valid) {
      ++r.valid;
    } else {
      ++r.class_counts[*o.error_class];
    }
    if (o.backend_failure) ++r.backend_failures;
  }
  r.outcomes = std::move(outcomes);
  return r;
}

struct BreakdownRow {
  std::string label;
  double percent = 0.0;
};

/// Four error-class rows followed by the total failure rate.
inline std::vector<BreakdownRow> error_breakdown(const EvalResult& r) {
  std::vector<BreakdownRow> rows;
  for (ErrorClass c : kAllErrorClasses) rows.push_back({std::string(label(c)), r.percent(c)});
  rows.push_back({"Total Failure Rate", r.failure_rate()});
  return rows;
}

inline std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

inline std::string render_table(const EvalResult& r) {
  auto rows = error_breakdown(r);
  std::size_t width = std::string("Plan Accuracy").size();
  for (const auto& row : rows) width = std::max(width, row.label.size());
  auto line = [&](const std::string& name, double value) {
    std::string cells = name + std::string(width - name.size() + 2, ' ');
    std::string num = format_percent(value);
    return cells + std::string(num.size() < 5 ? 5 - num.size() : 0, ' ') + num + "%\n";
  };
  std::string out = "Domain: " + r.domain + " (" + std::to_string(r.total) + " tasks)\n";
  out += line("Plan Accuracy", r.accuracy());
  for (const auto& row : rows) out += line(row.label, row.percent);
  if (r.backend_failures > 0) out += "backend failures: " + std::to_string(r.backend_failures) + "\n";
  return out;
}

inline json to_json(const EvalResult& r) {
  json j{{"schema", kSchemaVersion}, {"domain", r.domain}, {"total", r.total}, {"valid", r.valid},
         {"backend_failures", r.backend_failures}, {"accuracy", r.accuracy()}};
  json counts = json::object();
  json breakdown = json::object();
  for (ErrorClass c : kAllErrorClasses) {
    auto it = r.class_counts.find(c);
    counts[std::string(to_string(c))] = it == r.class_counts.end() ? 0 : it->second;
    breakdown[std::string(to_string(c))] = r.percent(c);
  }
  j["class_counts"] = counts;
  j["breakdown"] = breakdown;
  j["total_failure_rate"] = r.failure_rate();
  j["outcomes"] = json::array();
  for (const auto& o : r.outcomes) {
    json oj{{"problem_id", o.problem_id}, {"valid", o.valid}, {"backend_failure", o.backend_failure}, {"detail", o.detail}};
    oj["error_class"] = o.error_class ? json(to_string(*o.error_class)) : json(nullptr);
    j["outcomes"].push_back(std::move(oj));
  }
  return j;
}

/// Inverse of to_json; derived percentages are recomputed, not read back.
inline EvalResult eval_result_from_json(const json& j) {
  detail::check_schema(j);
  EvalResult r;
  r.domain = detail::get<std::string>(j, "domain");
  r.total = detail::get<std::size_t>(j, "total");
  r.valid = detail::get<std::size_t>(j, "valid");
  r.backend_failures = detail::get<std::size_t>(j, "backend_failures");
  for (const auto& [name, n] : detail::field(j, "class_counts").items()) {
    auto c = error_class_from_string(name);
    if (!c) throw SchemaError("unknown error class '" + name + "'");
    if (n.get<std::size_t>() > 0) r.class_counts[*c] = n.get<std::size_t>();
  }
  for (const auto& oj : detail::field(j, "outcomes")) {
    EvalOutcome o;
    o.problem_id = detail::get<std::string>(oj, "problem_id");
    o.valid = detail::get<bool>(oj, "valid");
    o.backend_failure = detail::get<bool>(oj, "backend_failure");
    o.detail = detail::get<std::string>(oj, "detail");
    const json& ec = detail::field(oj, "error_class");
    if (!ec.is_null()) {
      auto c = error_class_from_string(ec.get<std::string>());
      if (!c) throw SchemaError("unknown error class");
      o.error_class = c;
    }
    r.outcomes.push_back(std::move(o));
  }
  std::size_t failed = 0;
  for (const auto& [c, n] : r.class_counts) failed += n;
  if (r.valid > r.total || failed != r.total - r.valid) throw SchemaError("class counts do not match total - valid");
  return r;
}

}  // namespace pddl_instruct
