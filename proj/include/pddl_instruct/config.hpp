#pragma once

// Run configuration: loss weights, loop parameters, generator sizes and backend
// settings. JSON with // comments; unknown keys are rejected.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pddl_instruct/domains.hpp"
#include "pddl_instruct/feedback.hpp"
#include "pddl_instruct/losses.hpp"

namespace pddl_instruct {

struct LoopConfig {
  std::size_t eta = 15;
  FeedbackMode feedback_mode = FeedbackMode::detailed;
  double temperature = 0.3;
  std::size_t max_tokens = 2048;
  std::chrono::milliseconds timeout{120'000};
  std::size_t max_retries = 2;
  std::size_t concurrency = 1;
  // Passed through to the external trainer; the loop itself never trains.
  std::size_t reasoning_epochs = 1;
  std::size_t final_epochs = 1;
  std::string trainer_hook_url;
};

struct BackendSettings {
  std::string kind = "scripted";  // "scripted" | "http"
  std::string url;
  std::string api_key;  // taken from MODEL_API_KEY only, never from files
  std::string model = "default";
  std::string script_path;
  double phase1_temperature = 0.7;
  std::size_t retries = 2;
  std::chrono::milliseconds timeout{120'000};
};

struct GeneratorConfig {
  DomainKind domain = DomainKind::blocksworld;
  GeneratorSizes sizes;
  std::size_t problems = 100;
};

struct RunConfig {
  LossWeights loss;
  LoopConfig loop;
  GeneratorConfig generator;
  BackendSettings backend;
  double evaluation_temperature = 0.3;
  std::uint64_t seed = 0;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : Error("config " + (path.empty() ? std::string("<root>") : path) + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& root) : root_(root) {}

  void read(RunConfig& cfg) const {
    object(root_, "", {"seed", "loss", "loop", "generator", "backend", "evaluation"});
    integer(root_, "", "seed", cfg.seed);
    if (auto* j = section(root_, "", "loss")) {
      const std::string at = "loss";
      object(*j, at, {"alpha_precond", "alpha_effect", "alpha_goal", "lambda_feedback", "beta", "alpha", "bce_epsilon"});
      nonnegative(*j, at, "alpha_precond", cfg.loss.alpha_precond);
      nonnegative(*j, at, "alpha_effect", cfg.loss.alpha_effect);
      nonnegative(*j, at, "alpha_goal", cfg.loss.alpha_goal);
      nonnegative(*j, at, "lambda_feedback", cfg.loss.lambda_feedback);
      nonnegative(*j, at, "beta", cfg.loss.beta);
      nonnegative(*j, at, "alpha", cfg.loss.alpha);
      nonnegative(*j, at, "bce_epsilon", cfg.loss.bce_epsilon);
      if (!(cfg.loss.bce_epsilon > 0.0 && cfg.loss.bce_epsilon < 0.5)) {
        throw ConfigError("loss.bce_epsilon", "must lie in (0, 0.5)");
      }
    }
    if (auto* j = section(root_, "", "loop")) {
      const std::string at = "loop";
      object(*j, at, {"eta", "feedback_mode", "temperature", "max_tokens", "timeout_ms", "max_retries", "concurrency",
                      "reasoning_epochs", "final_epochs", "trainer_hook_url"});
      positive(*j, at, "eta", cfg.loop.eta);
      if (auto* m = find(*j, "feedback_mode")) {
        auto mode = m->is_string() ? feedback_mode_from_string(m->get<std::string>()) : std::nullopt;
        if (!mode) throw ConfigError("loop.feedback_mode", "expected \"binary\" or \"detailed\"");
        cfg.loop.feedback_mode = *mode;
      }
      nonnegative(*j, at, "temperature", cfg.loop.temperature);
      positive(*j, at, "max_tokens", cfg.loop.max_tokens);
      milliseconds(*j, at, "timeout_ms", cfg.loop.timeout);
      integer(*j, at, "max_retries", cfg.loop.max_retries);
      positive(*j, at, "concurrency", cfg.loop.concurrency);
      integer(*j, at, "reasoning_epochs", cfg.loop.reasoning_epochs);
      integer(*j, at, "final_epochs", cfg.loop.final_epochs);
      string(*j, at, "trainer_hook_url", cfg.loop.trainer_hook_url);
    }
    if (auto* j = section(root_, "", "generator")) {
      const std::string at = "generator";
      object(*j, at, {"domain", "problems", "blocks", "cities", "locations_per_city", "packages", "trucks_per_city",
                      "airplanes"});
      if (auto* k = find(*j, "domain")) {
        auto kind = k->is_string() ? domain_kind_from_string(k->get<std::string>()) : std::nullopt;
        if (!kind) throw ConfigError("generator.domain", "expected blocksworld, mystery_blocksworld or logistics");
        cfg.generator.domain = *kind;
      }
      positive(*j, at, "problems", cfg.generator.problems);
      positive(*j, at, "blocks", cfg.generator.sizes.blocksworld.blocks);
      positive(*j, at, "cities", cfg.generator.sizes.logistics.cities);
      positive(*j, at, "locations_per_city", cfg.generator.sizes.logistics.locations_per_city);
      positive(*j, at, "packages", cfg.generator.sizes.logistics.packages);
      positive(*j, at, "trucks_per_city", cfg.generator.sizes.logistics.trucks_per_city);
      positive(*j, at, "airplanes", cfg.generator.sizes.logistics.airplanes);
    }
    if (auto* j = section(root_, "", "backend")) {
      const std::string at = "backend";
      object(*j, at, {"kind", "url", "model", "script", "phase1_temperature", "retries", "timeout_ms"});
      string(*j, at, "kind", cfg.backend.kind);
      if (cfg.backend.kind != "scripted" && cfg.backend.kind != "http") {
        throw ConfigError("backend.kind", "expected \"scripted\" or \"http\"");
      }
      string(*j, at, "url", cfg.backend.url);
      string(*j, at, "model", cfg.backend.model);
      string(*j, at, "script", cfg.backend.script_path);
      nonnegative(*j, at, "phase1_temperature", cfg.backend.phase1_temperature);
      integer(*j, at, "retries", cfg.backend.retries);
      milliseconds(*j, at, "timeout_ms", cfg.backend.timeout);
    }
    if (auto* j = section(root_, "", "evaluation")) {
      object(*j, "evaluation", {"temperature"});
      nonnegative(*j, "evaluation", "temperature", cfg.evaluation_temperature);
    }
  }

 private:
  static std::string join(const std::string& at, const std::string& key) { return at.empty() ? key : at + "." + key; }

  static const nlohmann::json* find(const nlohmann::json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }

  static void object(const nlohmann::json& j, const std::string& at, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ConfigError(at, "expected an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(join(at, key), "unknown key");
    }
  }

  static const nlohmann::json* section(const nlohmann::json& j, const std::string& at, const std::string& key) {
    return find(j, key) ? &j.at(key) : (void(at), nullptr);
  }

  template <class T>
  static void integer(const nlohmann::json& j, const std::string& at, const std::string& key, T& out) {
    auto* v = find(j, key);
    if (v == nullptr) return;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      throw ConfigError(join(at, key), "expected a nonnegative integer");
    }
    out = static_cast<T>(v->get<long long>());
  }

  template <class T>
  static void positive(const nlohmann::json& j, const std::string& at, const std::string& key, T& out) {
    auto* v = find(j, key);
    if (v == nullptr) return;
    if (!v->is_number_integer() || v->get<long long>() < 1) throw ConfigError(join(at, key), "expected a positive integer");
    out = static_cast<T>(v->get<long long>());
  }

  static void nonnegative(const nlohmann::json& j, const std::string& at, const std::string& key, double& out) {
    auto* v = find(j, key);
    if (v == nullptr) return;
    if (!v->is_number() || !(v->get<double>() >= 0.0)) throw ConfigError(join(at, key), "expected a nonnegative number");
    out = v->get<double>();
  }

  static void milliseconds(const nlohmann::json& j, const std::string& at, const std::string& key,
                           std::chrono::milliseconds& out) {
    std::size_t ms = 0;
    if (find(j, key) == nullptr) return;
    positive(j, at, key, ms);
    out = std::chrono::milliseconds(ms);
  }

  static void string(const nlohmann::json& j, const std::string& at, const std::string& key, std::string& out) {
    auto* v = find(j, key);
    if (v == nullptr) return;
    if (!v->is_string()) throw ConfigError(join(at, key), "expected a string");
    out = v->get<std::string>();
  }

  const nlohmann::json& root_;
};

inline void apply_environment(RunConfig& cfg) {
  if (const char* url = std::getenv("MODEL_API_URL"); url != nullptr && *url != '\0') cfg.backend.url = url;
  if (const char* key = std::getenv("MODEL_API_KEY"); key != nullptr) cfg.backend.api_key = key;
}

}  // namespace detail

/// Parses configuration text over the defaults. Does not read the environment.
inline RunConfig parse_config(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  RunConfig cfg;
  detail::ConfigReader(root).read(cfg);
  return cfg;
}

/// Defaults when `path` is empty; otherwise the file's overrides. Backend
/// URL and key are then overridden by MODEL_API_URL / MODEL_API_KEY.
inline RunConfig load_config(const std::string& path = {}) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config(buf.str());
  }
  detail::apply_environment(cfg);
  return cfg;
}

}  // namespace pddl_instruct
