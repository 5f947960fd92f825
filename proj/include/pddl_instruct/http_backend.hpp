#pragma once

// Chat-completion client over cpp-httplib. HTTPS needs
// CPPHTTPLIB_OPENSSL_SUPPORT (and OpenSSL) at build time.

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pddl_instruct/backend.hpp"

namespace pddl_instruct {

struct HttpBackendOptions {
  std::string url;  // e.g. http://127.0.0.1:8000/v1/chat/completions
  std::string api_key;
  std::string model = "default";
  std::size_t retries = 2;
  std::chrono::milliseconds timeout{120'000};
  std::chrono::milliseconds backoff{200};  // doubled after each failed attempt
  std::function<void(const std::string&)> log;
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendError(BackendErrorKind::transport, "url lacks a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw BackendError(BackendErrorKind::transport, "unsupported scheme " + scheme);
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
  return e;
}

class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options) : opt_(std::move(options)), endpoint_(split_url(opt_.url)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint_.origin.rfind("https", 0) == 0) {
      throw BackendError(BackendErrorKind::transport, "https endpoints need a build with OpenSSL support");
    }
#endif
  }

  std::string generate(const GenerationRequest& request) override {
    nlohmann::json body = {
        {"model", opt_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    std::string payload = body.dump();
    auto delay = opt_.backoff;
    for (std::size_t attempt = 0;; ++attempt) {
      try {
        return post_once(payload);
      } catch (const BackendError& e) {
        bool retryable = e.kind() == BackendErrorKind::transport || e.kind() == BackendErrorKind::timeout ||
                         (e.kind() == BackendErrorKind::http_status && (e.status() >= 500 || e.status() == 429));
        if (!retryable || attempt >= opt_.retries) throw;
        log("attempt " + std::to_string(attempt + 1) + " failed (" + e.what() + "), retrying");
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        delay *= 2;
      }
    }
  }

  std::string identity() const override { return "http:" + opt_.model + "@" + endpoint_.origin; }

  bool concurrent_safe() const override { return true; }  // one client per call

 private:
  std::string post_once(const std::string& payload) const {
    httplib::Client client(endpoint_.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(opt_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opt_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!opt_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opt_.api_key);

    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(endpoint_.path, headers, payload, "application/json");
    if (!res) {
      auto err = res.error();
      auto elapsed = std::chrono::steady_clock::now() - started;
      // httplib reports a read timeout as a plain read failure.
      if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= opt_.timeout)) {
        throw BackendError(BackendErrorKind::timeout, "no response within " + std::to_string(opt_.timeout.count()) + " ms");
      }
      throw BackendError(BackendErrorKind::transport, httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError(BackendErrorKind::http_status, "status " + std::to_string(res->status), res->status);
    }
    return extract_content(res->body);
  }

  static std::string extract_content(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw BackendError(BackendErrorKind::malformed, "response is not JSON");
    const auto& choices = j.value("choices", nlohmann::json::array());
    if (!choices.is_array() || choices.empty()) throw BackendError(BackendErrorKind::malformed, "response has no choices");
    const auto& first = choices.front();
    if (first.contains("message") && first["message"].contains("content") && first["message"]["content"].is_string()) {
      return first["message"]["content"].get<std::string>();
    }
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
    throw BackendError(BackendErrorKind::malformed, "first choice has no text content");
  }

  void log(const std::string& message) const {
    if (opt_.log) opt_.log(message);
  }

  HttpBackendOptions opt_;
  Endpoint endpoint_;
};

/// Fire-and-forget POST of a JSON document (trainer-hook manifests).
/// Returns a one-line status for logging; never throws on network errors.
inline std::string post_json(const std::string& url, const nlohmann::json& doc,
                             std::chrono::milliseconds timeout = std::chrono::milliseconds(10'000)) {
  try {
    Endpoint e = split_url(url);
    httplib::Client client(e.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    auto res = client.Post(e.path, doc.dump(), "application/json");
    if (!res) return "failed: " + httplib::to_string(res.error());
    return "status " + std::to_string(res->status);
  } catch (const std::exception& ex) {
    return std::string("failed: ") + ex.what();
  }
}

}  // namespace pddl_instruct
