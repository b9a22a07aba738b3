// Copyright 2026 The kgsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgsynth/llm_client.h"

#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include <spdlog/spdlog.h>

#include "kgsynth/error.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

class HttpTransport : public Transport {
 public:
  HttpResponse post_json(const LlmConfig& config,
                         const std::string& body) override {
    // Split "scheme://host[:port]/prefix" into the client address and path.
    std::string base = config.base_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    std::size_t scheme = base.find("://");
    std::size_t slash =
        base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    std::string host = slash == std::string::npos ? base : base.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : base.substr(slash);

    httplib::Client client(host);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(
        config.timeout);
    client.set_connection_timeout(seconds);
    client.set_read_timeout(seconds);
    client.set_write_timeout(seconds);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    auto res = client.Post(prefix + "/chat/completions", headers, body,
                           "application/json");
    if (!res) {
      throw Error(ErrorCode::kTransport,
                  "request failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

LlmConfig LlmConfig::from_env() {
  LlmConfig c;
  c.base_url = env_or_empty("KGSYNTH_LLM_BASE_URL");
  c.model = env_or_empty("KGSYNTH_LLM_MODEL");
  c.api_key = env_or_empty("KGSYNTH_LLM_API_KEY");
  return c;
}

std::unique_ptr<Transport> make_http_transport() {
  return std::make_unique<HttpTransport>();
}

LlmClient::LlmClient(LlmConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_ && config_.configured()) {
    transport_ = make_http_transport();
  }
}

void LlmClient::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    while (!window_.empty() && now - window_.front() >= std::chrono::minutes(1)) {
      window_.pop_front();
    }
    bool slot = in_flight_ < std::max(1, config_.max_concurrent);
    bool budget = config_.requests_per_minute <= 0 ||
                  static_cast<int>(window_.size()) < config_.requests_per_minute;
    if (slot && budget) {
      ++in_flight_;
      window_.push_back(now);
      return;
    }
    if (!budget) {
      cv_.wait_until(lock, window_.front() + std::chrono::minutes(1));
    } else {
      cv_.wait(lock);
    }
  }
}

void LlmClient::release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

std::string LlmClient::chat(const ChatExchange& exchange) {
  if (!configured()) {
    throw Error(ErrorCode::kOffline, "no LLM endpoint configured");
  }
  if (exchange.messages.empty() || exchange.temperature < 0) {
    throw Error(ErrorCode::kContract, "chat needs messages and temperature >= 0");
  }
  const std::string body = chat_request_body(config_, exchange);
  const int attempts = std::max(1, config_.max_attempts);
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 2)));
    }
    acquire();
    ++requests_;
    HttpResponse res;
    try {
      res = transport_->post_json(config_, body);
    } catch (const Error& e) {
      release();
      last_error = e.what();
      spdlog::warn("llm attempt {}/{} failed: {}", attempt, attempts,
                   last_error);
      continue;
    }
    release();
    if (res.status >= 200 && res.status < 300) {
      return parse_chat_response(res.body);
    }
    last_error = "HTTP status " + std::to_string(res.status);
    spdlog::warn("llm attempt {}/{} failed: {}", attempt, attempts,
                 last_error);
    if (!retryable_status(res.status)) break;
  }
  throw Error(ErrorCode::kTransport, "LLM request failed: " + last_error);
}

std::string chat_request_body(const LlmConfig& config,
                              const ChatExchange& exchange) {
  json messages = json::array();
  for (const ChatMessage& m : exchange.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {{"model", config.model},
               {"messages", std::move(messages)},
               {"temperature", exchange.temperature},
               {"max_tokens", exchange.max_tokens}};
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kBadResponse, "response is not a JSON object");
  }
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::kBadResponse, "response has no choices");
  }
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") ||
      !first["message"].is_object() || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw Error(ErrorCode::kBadResponse, "choice has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

}  // namespace kgsynth
