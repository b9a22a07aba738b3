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
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgsynth/error.h"
#include "kgsynth/llm_client.h"

namespace kgsynth::testing {

inline std::string completion(const std::string& text) {
  nlohmann::json j = {
      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}}}};
  return j.dump();
}

// Transport double. Scripted replies are served in order; once they run
// out, `fallback` answers from the request's last message.
class FakeTransport : public Transport {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    bool drop = false;  // no response at all
  };

  HttpResponse post_json(const LlmConfig&, const std::string& body) override {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
    bodies_.push_back(body);
    if (!script_.empty()) {
      Reply r = script_.front();
      script_.pop_front();
      if (r.drop) throw Error(ErrorCode::kTransport, "connection refused");
      return {r.status, r.body};
    }
    if (fallback_) {
      auto j = nlohmann::json::parse(body);
      return {200, completion(fallback_(j["messages"].back()["content"]))};
    }
    throw Error(ErrorCode::kTransport, "script exhausted");
  }

  void push(Reply r) {
    std::lock_guard<std::mutex> lock(mu_);
    script_.push_back(std::move(r));
  }
  void push_text(const std::string& text) { push({200, completion(text)}); }
  void set_fallback(std::function<std::string(const std::string&)> fn) {
    fallback_ = std::move(fn);
  }
  std::size_t calls() const { return calls_.load(); }
  std::vector<std::string> bodies() {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }

 private:
  std::mutex mu_;
  std::deque<Reply> script_;
  std::function<std::string(const std::string&)> fallback_;
  std::atomic<std::size_t> calls_{0};
  std::vector<std::string> bodies_;
};

inline LlmConfig fake_config() {
  LlmConfig c;
  c.base_url = "http://llm.invalid/v1";
  c.model = "test-model";
  c.backoff = std::chrono::milliseconds(1);
  c.requests_per_minute = 100000;
  return c;
}

}  // namespace kgsynth::testing
