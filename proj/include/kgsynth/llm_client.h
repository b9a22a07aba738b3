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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace kgsynth {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatExchange {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 256;
};

struct LlmConfig {
  // e.g. "http://localhost:8000/v1"; requests go to <base_url>/chat/completions.
  std::string base_url;
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  // Delay before retry k is backoff * 2^(k-1).
  std::chrono::milliseconds backoff{500};
  int max_concurrent = 4;
  int requests_per_minute = 60;

  bool configured() const { return !base_url.empty() && !model.empty(); }

  // KGSYNTH_LLM_BASE_URL, KGSYNTH_LLM_MODEL, KGSYNTH_LLM_API_KEY.
  static LlmConfig from_env();
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// One POST of a JSON body. Throws Error(kTransport) when no response
// arrives at all.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const LlmConfig& config,
                                 const std::string& body) = 0;
};

std::unique_ptr<Transport> make_http_transport();

// Chat-completions client shared by every caller in a run. Concurrency and
// per-minute limits are enforced here.
class LlmClient {
 public:
  explicit LlmClient(LlmConfig config,
                     std::shared_ptr<Transport> transport = nullptr);

  bool configured() const { return config_.configured(); }
  const LlmConfig& config() const { return config_; }

  // Assistant text of the first choice. Throws kOffline when unconfigured,
  // kTransport once all attempts fail, kBadResponse on a malformed body.
  std::string chat(const ChatExchange& exchange);

  // Requests handed to the transport, including failed ones.
  std::size_t requests() const { return requests_.load(); }

 private:
  void acquire();
  void release();

  LlmConfig config_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::size_t> requests_{0};
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::deque<std::chrono::steady_clock::time_point> window_;
};

std::string chat_request_body(const LlmConfig& config,
                              const ChatExchange& exchange);
std::string parse_chat_response(std::string_view body);

// Replaces each "{name}" with vars[name]; unknown placeholders are kept.
std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& vars);

}  // namespace kgsynth
