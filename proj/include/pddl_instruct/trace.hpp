#pragma once

// Chain-of-thought traces: <state, action, result> steps, their text grammar
// and the logical-coherence check.
//
// Grammar, one step per block:
//
//   STATE: {(clear a) (handempty) (ontable a)}
//   ACTION: (pick-up a)
//   RESULT: {(holding a)}
//
// followed by optional "VALID: yes|no" and "CONFIDENCE: <number>" lines.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pddl_instruct/core.hpp"
#include "pddl_instruct/text.hpp"

namespace pddl_instruct {

struct ReasoningStep {
  std::size_t index = 1;
  State s_prev;
  ActionRef action;
  State s_next;
  std::string justification;  // captured, never checked

  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

struct CoTTrace {
  std::vector<ReasoningStep> steps;
  std::optional<bool> declared_valid;
  std::optional<double> confidence;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  friend bool operator==(const CoTTrace&, const CoTTrace&) = default;
};

class TraceParseError : public Error {
 public:
  TraceParseError(std::size_t line, const std::string& message)
      : Error("trace line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A step is missing one of its STATE/ACTION/RESULT lines.
class MissingField : public TraceParseError {
 public:
  MissingField(std::size_t line, std::size_t step, std::string field)
      : TraceParseError(line, "step " + std::to_string(step) + " has no " + field + " line"), step_(step),
        field_(std::move(field)) {}
  std::size_t step() const { return step_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t step_;
  std::string field_;
};

inline constexpr double kMinClaimedValidity = 0.01;
inline constexpr double kMaxClaimedValidity = 0.99;

/// The model's claimed probability that its plan is valid: CONFIDENCE when
/// present, otherwise VALID mapped to 0.99/0.01, clamped to [0.01, 0.99].
inline std::optional<double> claimed_validity(const CoTTrace& trace) {
  if (trace.confidence) return std::clamp(*trace.confidence, kMinClaimedValidity, kMaxClaimedValidity);
  if (trace.declared_valid) return *trace.declared_valid ? kMaxClaimedValidity : kMinClaimedValidity;
  return std::nullopt;
}

inline std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

inline std::string render_state(const State& s) { return "{" + to_string(s) + "}"; }

inline std::string render_trace(const CoTTrace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    if (!out.empty()) out += '\n';
    out += "STATE: " + render_state(step.s_prev) + "\n";
    out += "ACTION: " + to_string(step.action) + "\n";
    // Placed before RESULT, which closes the block when parsing.
    for (std::size_t at = 0; !step.justification.empty() && at != std::string::npos;) {
      auto nl = step.justification.find('\n', at);
      out += "JUSTIFICATION: " + step.justification.substr(at, nl == std::string::npos ? nl : nl - at) + "\n";
      at = nl == std::string::npos ? nl : nl + 1;
    }
    out += "RESULT: " + render_state(step.s_next) + "\n";
  }
  if (trace.declared_valid || trace.confidence) {
    if (!out.empty()) out += '\n';
    if (trace.declared_valid) out += std::string("VALID: ") + (*trace.declared_valid ? "yes" : "no") + "\n";
    if (trace.confidence) out += "CONFIDENCE: " + format_number(*trace.confidence) + "\n";
  }
  return out;
}

namespace detail {

enum class TraceField { state, action, result, valid, confidence, justification };

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Recognizes "LABEL: value" lines, tolerating markdown decoration such as
/// "- **STATE:** {...}".
inline std::optional<std::pair<TraceField, std::string>> classify_line(std::string_view raw) {
  std::string line;
  for (char c : raw) {
    if (c != '*' && c != '`') line += c;
  }
  std::string_view view = trim(line);
  while (!view.empty() && (view.front() == '-' || view.front() == '#' || view.front() == '>' || view.front() == ' ')) {
    view.remove_prefix(1);
  }
  static const std::pair<std::string_view, TraceField> labels[] = {
      {"state", TraceField::state},         {"action", TraceField::action},
      {"result", TraceField::result},       {"valid", TraceField::valid},
      {"confidence", TraceField::confidence}, {"justification", TraceField::justification},
  };
  auto colon = view.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string key = to_lower(trim(view.substr(0, colon)));
  for (const auto& [name, field] : labels) {
    if (key == name) return std::make_pair(field, std::string(trim(view.substr(colon + 1))));
  }
  return std::nullopt;
}

inline State parse_state_value(const std::string& value, std::size_t line) {
  std::string cleaned;
  for (char c : value) cleaned += (c == '{' || c == '}' || c == ',') ? ' ' : c;
  try {
    auto atoms = parse_atoms(cleaned);
    return State(atoms.begin(), atoms.end());
  } catch (const Error& err) {
    throw TraceParseError(line, std::string("malformed state: ") + err.what());
  }
}

inline ActionRef parse_action_value(const std::string& value, std::size_t line) {
  std::vector<Atom> atoms;
  try {
    atoms = parse_atoms(value);
  } catch (const Error& err) {
    throw TraceParseError(line, std::string("malformed action: ") + err.what());
  }
  if (atoms.size() != 1) throw TraceParseError(line, "expected exactly one action, got " + std::to_string(atoms.size()));
  return ActionRef{std::move(atoms.front().predicate), std::move(atoms.front().args)};
}

struct PartialStep {
  std::optional<State> s_prev;
  std::optional<ActionRef> action;
  std::optional<State> s_next;
  std::string justification;

  bool started() const { return s_prev || action || s_next; }
  bool complete() const { return s_prev && action && s_next; }
};

}  // namespace detail

/// Tolerant reader: lines other than STATE/ACTION/RESULT/VALID/CONFIDENCE/
/// JUSTIFICATION are ignored.
inline CoTTrace parse_trace(std::string_view text) {
  using detail::TraceField;
  CoTTrace trace;
  detail::PartialStep current;
  std::size_t line_no = 0;

  auto close_step = [&](std::size_t at_line) {
    if (!current.started()) {
      current = {};
      return;
    }
    std::size_t step = trace.steps.size() + 1;
    if (!current.s_prev) throw MissingField(at_line, step, "STATE");
    if (!current.action) throw MissingField(at_line, step, "ACTION");
    if (!current.s_next) throw MissingField(at_line, step, "RESULT");
    trace.steps.push_back(ReasoningStep{step, std::move(*current.s_prev), std::move(*current.action),
                                        std::move(*current.s_next), std::move(current.justification)});
    current = {};
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto field = detail::classify_line(raw);
    if (!field) continue;
    auto& [kind, value] = *field;
    switch (kind) {
      case TraceField::state:
        if (current.s_prev) close_step(line_no);
        current.s_prev = detail::parse_state_value(value, line_no);
        break;
      case TraceField::action:
        if (current.action) close_step(line_no);
        current.action = detail::parse_action_value(value, line_no);
        break;
      case TraceField::result:
        if (current.s_next) close_step(line_no);
        current.s_next = detail::parse_state_value(value, line_no);
        break;
      case TraceField::justification:
        if (current.started()) {
          if (!current.justification.empty()) current.justification += '\n';
          current.justification += value;
        }
        break;
      case TraceField::valid: {
        close_step(line_no);
        std::string v = to_lower(value);
        if (v == "yes" || v == "true" || v == "valid") {
          trace.declared_valid = true;
        } else if (v == "no" || v == "false" || v == "invalid") {
          trace.declared_valid = false;
        } else {
          throw TraceParseError(line_no, "VALID must be yes or no, got '" + value + "'");
        }
        break;
      }
      case TraceField::confidence: {
        close_step(line_no);
        double x = 0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), x);
        if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(x)) {
          throw TraceParseError(line_no, "CONFIDENCE must be a number, got '" + value + "'");
        }
        trace.confidence = x;
        break;
      }
    }
    if (current.complete()) close_step(line_no);
  }
  close_step(line_no);
  return trace;
}

inline Plan extract_plan(const CoTTrace& trace) {
  Plan plan;
  for (const auto& step : trace.steps) plan.steps.push_back(step.action);
  return plan;
}

/// Builds the trace obtained by executing `plan` from `init`. Stops before the
/// first action that cannot be resolved or applied.
inline CoTTrace simulate_trace(const Domain& d, const Problem& p, const Plan& plan) {
  CoTTrace trace;
  State state = p.init;
  for (const auto& ref : plan.steps) {
    GroundAction action;
    try {
      action = resolve(d, p, ref);
    } catch (const Error&) {
      break;
    }
    if (!applicable(state, action)) break;
    State next = apply_unchecked(state, action);
    trace.steps.push_back(ReasoningStep{trace.steps.size() + 1, state, ref, next, {}});
    state = std::move(next);
  }
  return trace;
}

/// Index (1-based) of the first step whose action is inapplicable, whose
/// result is not the successor state, or that does not continue from the
/// previous result. std::nullopt when the trace is coherent.
inline std::optional<std::size_t> check_coherence(const CoTTrace& trace, const Domain& d, const Problem& p) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const ReasoningStep& step = trace.steps[i];
    if (i > 0 && step.s_prev != trace.steps[i - 1].s_next) return i + 1;
    GroundAction action;
    try {
      action = resolve(d, p, step.action);
    } catch (const Error&) {
      return i + 1;
    }
    if (!applicable(step.s_prev, action)) return i + 1;
    if (apply(step.s_prev, action) != step.s_next) return i + 1;
  }
  return std::nullopt;
}

}  // namespace pddl_instruct
