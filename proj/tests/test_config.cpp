#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pddl_instruct/config.hpp"

using namespace pddl_instruct;

TEST(Config, Defaults) {
  RunConfig cfg = parse_config("{}");
  EXPECT_EQ(cfg.loss.alpha_precond, 1.0);
  EXPECT_EQ(cfg.loss.alpha_effect, 1.0);
  EXPECT_EQ(cfg.loss.alpha_goal, 1.5);
  EXPECT_EQ(cfg.loss.lambda_feedback, 0.1);
  EXPECT_EQ(cfg.loss.beta, 2.0);
  EXPECT_EQ(cfg.loss.alpha, 0.5);
  EXPECT_EQ(cfg.loss.bce_epsilon, 1e-6);
  EXPECT_EQ(cfg.loop.eta, 15u);
  EXPECT_EQ(cfg.loop.feedback_mode, FeedbackMode::detailed);
  EXPECT_EQ(cfg.loop.temperature, 0.3);
  EXPECT_EQ(cfg.loop.max_tokens, 2048u);
  EXPECT_EQ(cfg.backend.phase1_temperature, 0.7);
  EXPECT_EQ(cfg.evaluation_temperature, 0.3);
  EXPECT_EQ(cfg.backend.kind, "scripted");
  EXPECT_EQ(cfg.generator.domain, DomainKind::blocksworld);
}

TEST(Config, Overrides) {
  RunConfig cfg = parse_config(R"({
    // fewer iterations
    "loop": {"eta": 10, "feedback_mode": "binary", "concurrency": 4},
    "loss": {"beta": 3.5},
    "generator": {"domain": "logistics", "packages": 3},
    "seed": 42
  })");
  EXPECT_EQ(cfg.loop.eta, 10u);
  EXPECT_EQ(cfg.loop.feedback_mode, FeedbackMode::binary);
  EXPECT_EQ(cfg.loop.concurrency, 4u);
  EXPECT_EQ(cfg.loss.beta, 3.5);
  EXPECT_EQ(cfg.loss.alpha_goal, 1.5);
  EXPECT_EQ(cfg.generator.domain, DomainKind::logistics);
  EXPECT_EQ(cfg.generator.sizes.logistics.packages, 3u);
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  auto path_of = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(path_of(R"({"loop": {"eta": -1}})"), "loop.eta");
  EXPECT_EQ(path_of(R"({"loop": {"eta": 0}})"), "loop.eta");
  EXPECT_EQ(path_of(R"({"loop": {"etaa": 3}})"), "loop.etaa");
  EXPECT_EQ(path_of(R"({"colour": 1})"), "colour");
  EXPECT_EQ(path_of(R"({"loop": {"feedback_mode": "verbose"}})"), "loop.feedback_mode");
  EXPECT_EQ(path_of(R"({"loss": {"bce_epsilon": 0}})"), "loss.bce_epsilon");
  EXPECT_EQ(path_of(R"({"backend": {"kind": "local"}})"), "backend.kind");
  EXPECT_EQ(path_of("{"), "");
}

TEST(Config, ApiKeyNeverFromFile) {
  EXPECT_EQ(parse_config(R"({"backend": {"url": "http://x"}})").backend.url, "http://x");
  EXPECT_THROW(parse_config(R"({"backend": {"api_key": "secret"}})"), ConfigError);
}

TEST(Config, EnvironmentOverridesFile) {
  auto path = std::filesystem::temp_directory_path() / "pddl_instruct_config_test.jsonc";
  {
    std::ofstream out(path);
    out << R"({"backend": {"kind": "http", "url": "http://file"}})";
  }
  ::setenv("MODEL_API_URL", "http://env", 1);
  ::setenv("MODEL_API_KEY", "k", 1);
  RunConfig cfg = load_config(path.string());
  ::unsetenv("MODEL_API_URL");
  ::unsetenv("MODEL_API_KEY");
  EXPECT_EQ(cfg.backend.url, "http://env");
  EXPECT_EQ(cfg.backend.api_key, "k");
  EXPECT_EQ(cfg.backend.kind, "http");
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path.string()), ConfigError);
}
