#pragma once

// Dataset record types and their newline-delimited JSON encoding. Every record
// carries "schema": "v1"; atoms and actions are stored as PDDL strings.

#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddl_instruct/feedback.hpp"
#include "pddl_instruct/text.hpp"
#include "pddl_instruct/validator.hpp"

namespace pddl_instruct {

using json = nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "v1";

class SchemaError : public Error {
 public:
  using Error::Error;
};

enum class Phase1Label { correct, precondition_unsatisfied, effect_misapplied, frame_violation, goal_not_reached };

inline constexpr Phase1Label kAllPhase1Labels[] = {Phase1Label::correct, Phase1Label::precondition_unsatisfied,
                                                   Phase1Label::effect_misapplied, Phase1Label::frame_violation,
                                                   Phase1Label::goal_not_reached};

inline std::string_view to_string(Phase1Label l) {
  switch (l) {
    case Phase1Label::correct: return "correct";
    case Phase1Label::precondition_unsatisfied: return "precondition_unsatisfied";
    case Phase1Label::effect_misapplied: return "effect_misapplied";
    case Phase1Label::frame_violation: return "frame_violation";
    case Phase1Label::goal_not_reached: return "goal_not_reached";
  }
  return "correct";
}

inline std::optional<Phase1Label> phase1_label_from_string(std::string_view s) {
  for (auto l : kAllPhase1Labels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

/// Error class the validator must report for a corrupted record.
inline std::optional<ErrorClass> expected_error_class(Phase1Label l) {
  switch (l) {
    case Phase1Label::correct: return std::nullopt;
    case Phase1Label::precondition_unsatisfied: return ErrorClass::precondition_violation;
    case Phase1Label::effect_misapplied:
    case Phase1Label::frame_violation: return ErrorClass::incorrect_effect;
    case Phase1Label::goal_not_reached: return ErrorClass::goal_not_achieved;
  }
  return std::nullopt;
}

struct Phase1Record {
  std::string id;
  std::string domain;   // PDDL text
  std::string problem;  // PDDL text
  std::string plan;     // plan file text
  std::string trace;    // trace text; empty when the label concerns the action sequence only
  Phase1Label label = Phase1Label::correct;
  std::string explanation;

  friend bool operator==(const Phase1Record&, const Phase1Record&) = default;
};

/// One <s_prev, action, s_claimed> triple with its step-level feedback.
struct ReasoningRecord {
  std::string problem_id;
  std::size_t iteration = 1;
  std::size_t step = 1;
  State s_prev;
  ActionRef action;
  State s_claimed;
  bool is_final = false;
  StepVerdict feedback;

  friend bool operator==(const ReasoningRecord&, const ReasoningRecord&) = default;
};

/// A complete plan with its validity label v and the model's claimed v_hat.
struct FinalRecord {
  std::string problem_id;
  std::size_t iteration = 1;
  std::string domain;
  std::string problem;
  std::string plan;
  std::string trace;  // the completion the verdict was computed from
  int v = 0;
  double v_hat = 0.5;
  std::optional<ErrorClass> error_class;

  friend bool operator==(const FinalRecord&, const FinalRecord&) = default;
};

namespace detail {

inline json atoms_json(const std::vector<Atom>& atoms) {
  json out = json::array();
  for (const auto& a : atoms) out.push_back(to_string(a));
  return out;
}

inline json atoms_json(const State& s) {
  json out = json::array();
  for (const auto& a : s) out.push_back(to_string(a));
  return out;
}

inline std::vector<Atom> atoms_from(const json& j, std::string_view field) {
  if (!j.is_array()) throw SchemaError(std::string(field) + ": expected array of atoms");
  std::vector<Atom> out;
  for (const auto& item : j) {
    if (!item.is_string()) throw SchemaError(std::string(field) + ": expected atom string");
    auto atoms = parse_atoms(item.get<std::string>());
    if (atoms.size() != 1) throw SchemaError(std::string(field) + ": expected one atom per string");
    out.push_back(std::move(atoms.front()));
  }
  return out;
}

inline State state_from(const json& j, std::string_view field) {
  auto atoms = atoms_from(j, field);
  return State(atoms.begin(), atoms.end());
}

inline ActionRef action_from(const json& j, std::string_view field) {
  if (!j.is_string()) throw SchemaError(std::string(field) + ": expected action string");
  auto atoms = parse_atoms(j.get<std::string>());
  if (atoms.size() != 1) throw SchemaError(std::string(field) + ": expected one action");
  return ActionRef{std::move(atoms.front().predicate), std::move(atoms.front().args)};
}

inline const json& field(const json& j, std::string_view name) {
  auto it = j.find(std::string(name));
  if (it == j.end()) throw SchemaError("missing field '" + std::string(name) + "'");
  return *it;
}

template <class T>
T get(const json& j, std::string_view name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError("field '" + std::string(name) + "': " + e.what());
  }
}

inline void check_schema(const json& j) {
  if (!j.is_object()) throw SchemaError("record must be a JSON object");
  if (get<std::string>(j, "schema") != kSchemaVersion) throw SchemaError("unsupported schema version");
}

}  // namespace detail

inline json to_json(const StepVerdict& v) {
  return json{{"index", v.index},
              {"action", to_string(v.action)},
              {"status", to_string(v.status)},
              {"missing_preconditions", detail::atoms_json(v.missing_preconditions)},
              {"expected_state", detail::atoms_json(v.expected_state)},
              {"claimed_state", detail::atoms_json(v.claimed_state)},
              {"state_diff",
               {{"missing", detail::atoms_json(v.state_diff.missing)}, {"extra", detail::atoms_json(v.state_diff.extra)}}},
              {"unmet_goals", detail::atoms_json(v.unmet_goals)}};
}

inline StepVerdict step_verdict_from_json(const json& j) {
  StepVerdict v;
  v.index = detail::get<std::size_t>(j, "index");
  v.action = detail::action_from(detail::field(j, "action"), "action");
  auto status = step_status_from_string(detail::get<std::string>(j, "status"));
  if (!status) throw SchemaError("unknown step status");
  v.status = *status;
  v.missing_preconditions = detail::atoms_from(detail::field(j, "missing_preconditions"), "missing_preconditions");
  v.expected_state = detail::state_from(detail::field(j, "expected_state"), "expected_state");
  v.claimed_state = detail::state_from(detail::field(j, "claimed_state"), "claimed_state");
  const json& diff = detail::field(j, "state_diff");
  v.state_diff.missing = detail::state_from(detail::field(diff, "missing"), "state_diff.missing");
  v.state_diff.extra = detail::state_from(detail::field(diff, "extra"), "state_diff.extra");
  v.unmet_goals = detail::atoms_from(detail::field(j, "unmet_goals"), "unmet_goals");
  return v;
}

inline json to_json(const Phase1Record& r) {
  return json{{"schema", kSchemaVersion}, {"id", r.id},       {"domain", r.domain},
              {"problem", r.problem},     {"plan", r.plan},   {"trace", r.trace},
              {"label", to_string(r.label)}, {"explanation", r.explanation}};
}

inline Phase1Record phase1_record_from_json(const json& j) {
  detail::check_schema(j);
  Phase1Record r;
  r.id = detail::get<std::string>(j, "id");
  r.domain = detail::get<std::string>(j, "domain");
  r.problem = detail::get<std::string>(j, "problem");
  r.plan = detail::get<std::string>(j, "plan");
  r.trace = detail::get<std::string>(j, "trace");
  auto label = phase1_label_from_string(detail::get<std::string>(j, "label"));
  if (!label) throw SchemaError("unknown label");
  r.label = *label;
  r.explanation = detail::get<std::string>(j, "explanation");
  return r;
}

inline json to_json(const ReasoningRecord& r) {
  return json{{"schema", kSchemaVersion},
              {"problem_id", r.problem_id},
              {"iteration", r.iteration},
              {"step", r.step},
              {"s_prev", detail::atoms_json(r.s_prev)},
              {"action", to_string(r.action)},
              {"s_claimed", detail::atoms_json(r.s_claimed)},
              {"is_final", r.is_final},
              {"feedback", to_json(r.feedback)}};
}

inline ReasoningRecord reasoning_record_from_json(const json& j) {
  detail::check_schema(j);
  ReasoningRecord r;
  r.problem_id = detail::get<std::string>(j, "problem_id");
  r.iteration = detail::get<std::size_t>(j, "iteration");
  r.step = detail::get<std::size_t>(j, "step");
  r.s_prev = detail::state_from(detail::field(j, "s_prev"), "s_prev");
  r.action = detail::action_from(detail::field(j, "action"), "action");
  r.s_claimed = detail::state_from(detail::field(j, "s_claimed"), "s_claimed");
  r.is_final = detail::get<bool>(j, "is_final");
  r.feedback = step_verdict_from_json(detail::field(j, "feedback"));
  return r;
}

inline json to_json(const FinalRecord& r) {
  json j{{"schema", kSchemaVersion}, {"problem_id", r.problem_id}, {"iteration", r.iteration},
         {"domain", r.domain},       {"problem", r.problem},       {"plan", r.plan},
         {"trace", r.trace},         {"v", r.v},                   {"v_hat", r.v_hat}};
  j["error_class"] = r.error_class ? json(to_string(*r.error_class)) : json(nullptr);
  return j;
}

inline FinalRecord final_record_from_json(const json& j) {
  detail::check_schema(j);
  FinalRecord r;
  r.problem_id = detail::get<std::string>(j, "problem_id");
  r.iteration = detail::get<std::size_t>(j, "iteration");
  r.domain = detail::get<std::string>(j, "domain");
  r.problem = detail::get<std::string>(j, "problem");
  r.plan = detail::get<std::string>(j, "plan");
  r.trace = detail::get<std::string>(j, "trace");
  r.v = detail::get<int>(j, "v");
  if (r.v != 0 && r.v != 1) throw SchemaError("field 'v' must be 0 or 1");
  r.v_hat = detail::get<double>(j, "v_hat");
  if (!(r.v_hat >= 0.0 && r.v_hat <= 1.0)) throw SchemaError("field 'v_hat' must lie in [0, 1]");
  const json& ec = detail::field(j, "error_class");
  if (!ec.is_null()) {
    auto cls = error_class_from_string(ec.get<std::string>());
    if (!cls) throw SchemaError("unknown error class");
    r.error_class = cls;
  }
  return r;
}

/// Step records for every resolvable step of `trace`, validated against the
/// claimed states (the goal is checked on the last step only).
inline std::vector<ReasoningRecord> build_reasoning_dataset(const std::string& problem_id, std::size_t iteration,
                                                            const Domain& d, const Problem& p, const CoTTrace& trace) {
  std::vector<ReasoningRecord> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const ReasoningStep& step = trace.steps[i];
    GroundAction action;
    try {
      action = resolve(d, p, step.action);
    } catch (const Error&) {
      continue;
    }
    bool is_final = i + 1 == trace.size();
    ReasoningRecord r;
    r.problem_id = problem_id;
    r.iteration = iteration;
    r.step = i + 1;
    r.s_prev = step.s_prev;
    r.action = step.action;
    r.s_claimed = step.s_next;
    r.is_final = is_final;
    r.feedback = validate_step(step.s_prev, action, step.s_next, &p.goal, is_final);
    r.feedback.index = i + 1;
    out.push_back(std::move(r));
  }
  return out;
}

inline constexpr double kUninformedValidity = 0.5;

inline FinalRecord make_final_record(const std::string& problem_id, std::size_t iteration, const Domain& d,
                                     const Problem& p, const Plan& plan, const PlanVerdict& verdict,
                                     std::optional<double> v_hat, std::string trace = {}) {
  FinalRecord r;
  r.problem_id = problem_id;
  r.iteration = iteration;
  r.domain = print_domain(d);
  r.problem = print_problem(p);
  r.plan = print_plan(plan);
  r.trace = std::move(trace);
  r.v = verdict.valid ? 1 : 0;
  r.v_hat = v_hat.value_or(kUninformedValidity);
  r.error_class = verdict.error_class;
  return r;
}

/// Parse-then-validate for raw model output. Text without a single
/// reasoning step counts as unparseable (invalid_sequence).
struct Assessment {
  std::optional<CoTTrace> trace;
  std::string parse_error;
  PlanVerdict verdict;
};

inline Assessment assess_completion(const Domain& d, const Problem& p, std::string_view text) {
  Assessment a;
  try {
    CoTTrace trace = parse_trace(text);
    if (trace.empty()) {
      a.parse_error = "no reasoning steps found";
    } else {
      a.verdict = validate_trace(d, p, trace);
      a.trace = std::move(trace);
      return a;
    }
  } catch (const Error& e) {
    a.parse_error = e.what();
  }
  a.verdict = unparseable_verdict(a.parse_error);
  return a;
}

/// Recomputes the verdict of a stored final record from its own texts.
inline PlanVerdict revalidate(const FinalRecord& r) {
  Domain d = parse_domain(r.domain);
  Problem p = parse_problem(r.problem, d);
  return assess_completion(d, p, r.trace).verdict;
}

template <class Record>
void write_jsonl(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

template <class Record>
void write_jsonl(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_jsonl(out, records);
}

template <class Decode>
auto read_jsonl(std::istream& in, Decode decode) {
  std::vector<decltype(decode(json{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(decode(json::parse(line)));
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <class Decode>
auto read_jsonl(const std::string& path, Decode decode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_jsonl(in, decode);
}

}  // namespace pddl_instruct
