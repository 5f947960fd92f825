#pragma once

// Model backends. The loop only sees generate(); anything stateful (HTTP
// connections, scripts) lives behind this interface.

#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "pddl_instruct/core.hpp"

namespace pddl_instruct {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.3;
  std::size_t max_tokens = 2048;
  // Routing metadata; http backends ignore it, scripted ones key on it.
  std::string problem_id;
  std::size_t iteration = 1;
};

enum class BackendErrorKind { transport, http_status, malformed, timeout };

inline std::string_view to_string(BackendErrorKind k) {
  switch (k) {
    case BackendErrorKind::transport: return "transport";
    case BackendErrorKind::http_status: return "http_status";
    case BackendErrorKind::malformed: return "malformed";
    case BackendErrorKind::timeout: return "timeout";
  }
  return "?";
}

class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message, int status = 0)
      : Error(std::string(to_string(kind)) + ": " + message), kind_(kind), status_(status) {}
  BackendErrorKind kind() const { return kind_; }
  int status() const { return status_; }

 private:
  BackendErrorKind kind_;
  int status_;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
  virtual std::string identity() const = 0;
  virtual bool deterministic() const { return false; }
  /// False forces the orchestrator to call generate() from one thread.
  virtual bool concurrent_safe() const { return false; }
};

/// Lookup table keyed on (problem id, iteration). An entry with iteration 0
/// applies to every iteration of that problem that has no exact entry.
class ScriptedBackend : public ModelBackend {
 public:
  using Key = std::pair<std::string, std::size_t>;

  explicit ScriptedBackend(std::map<Key, std::string> script = {}, std::string fallback = {})
      : script_(std::move(script)), fallback_(std::move(fallback)) {}

  void set(const std::string& problem_id, std::size_t iteration, std::string completion) {
    script_[{problem_id, iteration}] = std::move(completion);
  }
  void set_default(std::string completion) { fallback_ = std::move(completion); }

  std::string generate(const GenerationRequest& request) override {
    if (auto it = script_.find({request.problem_id, request.iteration}); it != script_.end()) return it->second;
    if (auto it = script_.find({request.problem_id, 0}); it != script_.end()) return it->second;
    return fallback_;
  }
  std::string identity() const override { return "scripted"; }
  bool deterministic() const override { return true; }
  bool concurrent_safe() const override { return true; }  // read-only after construction

  std::size_t size() const { return script_.size(); }

 private:
  std::map<Key, std::string> script_;
  std::string fallback_;
};

/// {"default": "...", "entries": [{"problem": id, "iteration": t, "completion": text}, ...]}
/// "iteration" may be omitted to match every iteration.
inline ScriptedBackend scripted_backend_from_json(const nlohmann::json& j) {
  ScriptedBackend backend;
  try {
    if (j.contains("default")) backend.set_default(j.at("default").get<std::string>());
    for (const auto& e : j.value("entries", nlohmann::json::array())) {
      backend.set(e.at("problem").get<std::string>(), e.value("iteration", std::size_t{0}),
                  e.at("completion").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scripted backend: ") + e.what());
  }
  return backend;
}

inline ScriptedBackend load_scripted_backend(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open script '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return scripted_backend_from_json(nlohmann::json::parse(buf.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("script '" + path + "': " + e.what());
  }
}

/// Adapts a callable; used by tests and by callers embedding their own model.
class FunctionBackend : public ModelBackend {
 public:
  using Fn = std::function<std::string(const GenerationRequest&)>;

  FunctionBackend(Fn fn, std::string name, bool deterministic = true, bool concurrent = false)
      : fn_(std::move(fn)), name_(std::move(name)), deterministic_(deterministic), concurrent_(concurrent) {}

  std::string generate(const GenerationRequest& request) override { return fn_(request); }
  std::string identity() const override { return name_; }
  bool deterministic() const override { return deterministic_; }
  bool concurrent_safe() const override { return concurrent_; }

 private:
  Fn fn_;
  std::string name_;
  bool deterministic_;
  bool concurrent_;
};

}  // namespace pddl_instruct
