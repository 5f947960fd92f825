#pragma once

// Prompt templates for instruction data and the chain-of-thought loop.
// Placeholders are {domain}, {problem}, {prior_trace} and {feedback};
// substitution is a single pass, so payload text is never rescanned.

#include <map>
#include <string>
#include <string_view>

#include "pddl_instruct/core.hpp"

namespace pddl_instruct {

enum class PromptKind { phase1_correct, phase1_incorrect, cot_generate, cot_feedback_binary, cot_feedback_detailed };

inline std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::phase1_correct: return "phase1_correct";
    case PromptKind::phase1_incorrect: return "phase1_incorrect";
    case PromptKind::cot_generate: return "cot_generate";
    case PromptKind::cot_feedback_binary: return "cot_feedback_binary";
    case PromptKind::cot_feedback_detailed: return "cot_feedback_detailed";
  }
  return "?";
}

class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(const std::string& name)
      : Error("prompt placeholder {" + name + "} has no binding"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using PromptBindings = std::map<std::string, std::string, std::less<>>;

inline constexpr std::string_view kTraceFormatInstructions = R"(Answer format:
Write one block per action, in execution order:
STATE: {atoms true before the action, e.g. (predicate obj1 obj2) (predicate2 obj1)}
ACTION: (action-name arg1 arg2 ...)
RESULT: {atoms true after the action}
Each RESULT must be the STATE of the next block. Optionally add a
JUSTIFICATION: line to a block. After the last block write
VALID: yes or VALID: no, and CONFIDENCE: a number between 0 and 1.
)";

struct PromptTemplate {
  PromptKind kind;
  std::string body;

  bool is_cot() const {
    return kind == PromptKind::cot_generate || kind == PromptKind::cot_feedback_binary ||
           kind == PromptKind::cot_feedback_detailed;
  }
};

inline PromptTemplate default_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::phase1_correct:
      return {kind,
              "Domain:\n{domain}\nProblem:\n{problem}\nPlan with its reasoning:\n{prior_trace}\n"
              "The plan above is valid. Explain, action by action, why each precondition holds in the state "
              "where the action is applied and how its effects produce the next state.\n{feedback}\n"};
    case PromptKind::phase1_incorrect:
      return {kind,
              "Domain:\n{domain}\nProblem:\n{problem}\nPlan with its reasoning:\n{prior_trace}\n"
              "The plan above is invalid. Identify the first step that goes wrong and explain the failure.\n"
              "{feedback}\n"};
    case PromptKind::cot_generate:
      return {kind,
              "You are given a planning domain and a problem in PDDL.\nDomain:\n{domain}\nProblem:\n{problem}\n"
              "Find a sequence of actions that reaches the goal. Before each action, check its preconditions "
              "against the current state; after it, apply the delete effects and then the add effects.\n"};
    case PromptKind::cot_feedback_binary:
      return {kind,
              "Domain:\n{domain}\nProblem:\n{problem}\nYour previous attempt:\n{prior_trace}\n"
              "A plan validator judged that attempt: {feedback}\n"
              "Reason again step by step and produce a corrected plan.\n"};
    case PromptKind::cot_feedback_detailed:
      return {kind,
              "Domain:\n{domain}\nProblem:\n{problem}\nYour previous attempt:\n{prior_trace}\n"
              "A plan validator reported:\n{feedback}\n"
              "Fix the reported step and everything after it, then produce the full corrected plan.\n"};
  }
  throw Error("unknown prompt kind");
}

/// Substitutes every {name} (lowercase letters and '_') in one pass. Braces
/// around anything else are left alone, so PDDL and trace text survive.
inline std::string render_prompt(const PromptTemplate& t, const PromptBindings& bindings) {
  std::string out;
  out.reserve(t.body.size());
  std::size_t i = 0;
  while (i < t.body.size()) {
    char c = t.body[i];
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < t.body.size() && ((t.body[j] >= 'a' && t.body[j] <= 'z') || t.body[j] == '_')) ++j;
      if (j > i + 1 && j < t.body.size() && t.body[j] == '}') {
        std::string_view name(t.body.data() + i + 1, j - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw MissingPlaceholder(std::string(name));
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += c;
    ++i;
  }
  if (t.is_cot()) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += kTraceFormatInstructions;
  }
  return out;
}

}  // namespace pddl_instruct
