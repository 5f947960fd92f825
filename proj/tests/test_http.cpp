#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "pddl_instruct/http_backend.hpp"

using namespace pddl_instruct;

namespace {

// Loopback server on an ephemeral port, stopped on destruction.
class Server {
 public:
  explicit Server(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Server() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

HttpBackendOptions options(const std::string& url) {
  HttpBackendOptions o;
  o.url = url;
  o.api_key = "sk-test-secret";
  o.model = "m";
  o.retries = 0;
  o.timeout = std::chrono::milliseconds(2000);
  o.backoff = std::chrono::milliseconds(0);
  return o;
}

}  // namespace

TEST(Http, SplitUrl) {
  EXPECT_EQ(split_url("http://h:8/x/y").origin, "http://h:8");
  EXPECT_EQ(split_url("http://h:8/x/y").path, "/x/y");
  EXPECT_EQ(split_url("http://h").path, "/v1/chat/completions");
  EXPECT_THROW(split_url("h:8"), BackendError);
  EXPECT_THROW(split_url("ftp://h"), BackendError);
}

TEST(Http, SendsRequestAndReadsContent) {
  nlohmann::json seen;
  std::string auth;
  Server s([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(reply("echo:" + seen["messages"][0]["content"].get<std::string>()), "application/json");
  });
  HttpBackend b(options(s.url()));
  GenerationRequest r;
  r.prompt = "hello";
  r.temperature = 0.7;
  EXPECT_EQ(b.generate(r), "echo:hello");
  EXPECT_EQ(seen["model"], "m");
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.7);
  EXPECT_EQ(seen["max_tokens"], 2048);
  EXPECT_EQ(auth, "Bearer sk-test-secret");
  EXPECT_EQ(b.identity().find("secret"), std::string::npos);
}

TEST(Http, RetriesServerErrors) {
  std::atomic<int> hits{0};
  Server s([&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 500;
      return;
    }
    res.set_content(reply("ok"), "application/json");
  });
  auto o = options(s.url());
  o.retries = 1;
  HttpBackend b(o);
  EXPECT_EQ(b.generate({}), "ok");
  EXPECT_EQ(hits.load(), 2);

  hits = 0;
  HttpBackend no_retry(options(s.url()));
  try {
    no_retry.generate({});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::http_status);
    EXPECT_EQ(e.status(), 500);
    EXPECT_EQ(std::string(e.what()).find("secret"), std::string::npos);
  }
}

TEST(Http, ClientErrorsAreNotRetried) {
  std::atomic<int> hits{0};
  Server s([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  auto o = options(s.url());
  o.retries = 3;
  HttpBackend b(o);
  EXPECT_THROW(b.generate({}), BackendError);
  EXPECT_EQ(hits.load(), 1);
}

TEST(Http, Timeout) {
  Server s([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(reply("late"), "application/json");
  });
  auto o = options(s.url());
  o.timeout = std::chrono::milliseconds(200);
  HttpBackend b(o);
  try {
    b.generate({});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::timeout);
  }
}

TEST(Http, MalformedResponses) {
  std::atomic<int> hits{0};
  Server s([&](const httplib::Request&, httplib::Response& res) {
    switch (hits++) {
      case 0: res.set_content("not json", "text/plain"); break;
      case 1: res.set_content(R"({"choices": []})", "application/json"); break;
      default: res.set_content(R"({"choices": [{"text": "legacy"}]})", "application/json"); break;
    }
  });
  HttpBackend b(options(s.url()));
  for (int i = 0; i < 2; ++i) {
    try {
      b.generate({});
      FAIL();
    } catch (const BackendError& e) {
      EXPECT_EQ(e.kind(), BackendErrorKind::malformed);
    }
  }
  EXPECT_EQ(b.generate({}), "legacy");
}

TEST(Http, ConnectionRefused) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto o = options("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
  o.timeout = std::chrono::milliseconds(300);
  HttpBackend b(o);
  // Some sandboxes drop rather than refuse, which surfaces as a timeout.
  try {
    b.generate({});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.kind() == BackendErrorKind::transport || e.kind() == BackendErrorKind::timeout) << e.what();
  }
}

TEST(Http, PostJson) {
  nlohmann::json got;
  Server s([&](const httplib::Request& req, httplib::Response& res) {
    got = nlohmann::json::parse(req.body);
    res.status = 202;
  });
  EXPECT_EQ(post_json(s.url(), {{"iteration", 1}}), "status 202");
  EXPECT_EQ(got["iteration"], 1);
  EXPECT_EQ(post_json("bogus", {}).rfind("failed", 0), 0u);
}
