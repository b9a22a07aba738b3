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

#include <gtest/gtest.h>

#include <thread>

#include "fake_llm.h"
#include "kgsynth/error.h"
#include "kgsynth/llm_client.h"

namespace kgsynth {
namespace {

using testing::FakeTransport;
using testing::fake_config;

ChatExchange hello() {
  ChatExchange ex;
  ex.messages.push_back({"user", "hello"});
  return ex;
}

ErrorCode chat_error(LlmClient& client, const ChatExchange& ex) {
  try {
    client.chat(ex);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kContract;
}

TEST(LlmClient, UnconfiguredIsOffline) {
  auto t = std::make_shared<FakeTransport>();
  LlmClient client(LlmConfig{}, t);
  EXPECT_FALSE(client.configured());
  EXPECT_EQ(chat_error(client, hello()), ErrorCode::kOffline);
  EXPECT_EQ(t->calls(), 0u);
  EXPECT_EQ(client.requests(), 0u);
}

TEST(LlmClient, ReturnsFirstChoiceText) {
  auto t = std::make_shared<FakeTransport>();
  t->push_text("hi there");
  LlmClient client(fake_config(), t);
  EXPECT_EQ(client.chat(hello()), "hi there");
  auto body = nlohmann::json::parse(t->bodies().at(0));
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hello");
}

TEST(LlmClient, TwoTransientFailuresThenSuccess) {
  auto t = std::make_shared<FakeTransport>();
  t->push({.drop = true});
  t->push({503, "busy"});
  t->push_text("ok");
  LlmClient client(fake_config(), t);
  EXPECT_EQ(client.chat(hello()), "ok");
  EXPECT_EQ(t->calls(), 3u);
  EXPECT_EQ(client.requests(), 3u);
}

TEST(LlmClient, RateLimitStatusIsRetried) {
  auto t = std::make_shared<FakeTransport>();
  t->push({429, ""});
  t->push_text("ok");
  LlmClient client(fake_config(), t);
  EXPECT_EQ(client.chat(hello()), "ok");
  EXPECT_EQ(t->calls(), 2u);
}

TEST(LlmClient, ExhaustedRetriesAreTransportError) {
  auto t = std::make_shared<FakeTransport>();
  for (int i = 0; i < 3; ++i) t->push({500, ""});
  LlmClient client(fake_config(), t);
  EXPECT_EQ(chat_error(client, hello()), ErrorCode::kTransport);
  EXPECT_EQ(t->calls(), 3u);
}

TEST(LlmClient, ClientErrorIsNotRetried) {
  auto t = std::make_shared<FakeTransport>();
  t->push({400, "bad"});
  LlmClient client(fake_config(), t);
  EXPECT_EQ(chat_error(client, hello()), ErrorCode::kTransport);
  EXPECT_EQ(t->calls(), 1u);
}

TEST(LlmClient, MalformedBody) {
  auto t = std::make_shared<FakeTransport>();
  t->push({200, "{\"choices\": []}"});
  LlmClient client(fake_config(), t);
  EXPECT_EQ(chat_error(client, hello()), ErrorCode::kBadResponse);
  EXPECT_THROW(parse_chat_response("not json"), Error);
  EXPECT_EQ(parse_chat_response(testing::completion("x")), "x");
}

TEST(LlmClient, RejectsEmptyExchange) {
  auto t = std::make_shared<FakeTransport>();
  LlmClient client(fake_config(), t);
  EXPECT_EQ(chat_error(client, ChatExchange{}), ErrorCode::kContract);
  ChatExchange negative = hello();
  negative.temperature = -1;
  EXPECT_EQ(chat_error(client, negative), ErrorCode::kContract);
  EXPECT_EQ(t->calls(), 0u);
}

class SlowTransport : public Transport {
 public:
  HttpResponse post_json(const LlmConfig&, const std::string&) override {
    int now = ++in_flight_;
    int seen = max_seen_.load();
    while (now > seen && !max_seen_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight_;
    return {200, testing::completion("done")};
  }
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_seen_{0};
};

TEST(LlmClient, ConcurrencyIsCapped) {
  auto t = std::make_shared<SlowTransport>();
  LlmConfig c = fake_config();
  c.max_concurrent = 2;
  LlmClient client(c, t);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { EXPECT_EQ(client.chat(hello()), "done"); });
  }
  for (auto& th : threads) th.join();
  EXPECT_LE(t->max_seen_.load(), 2);
  EXPECT_EQ(client.requests(), 6u);
}

TEST(LlmClient, RenderTemplate) {
  EXPECT_EQ(render_template("a {x} b {y} {z}", {{"x", "1"}, {"y", "{x}"}}),
            "a 1 b {x} {z}");
}

TEST(LlmClient, ConfigFromEnvironment) {
  ::setenv("KGSYNTH_LLM_BASE_URL", "http://example.invalid/v1", 1);
  ::setenv("KGSYNTH_LLM_MODEL", "m", 1);
  ::setenv("KGSYNTH_LLM_API_KEY", "k", 1);
  LlmConfig c = LlmConfig::from_env();
  ::unsetenv("KGSYNTH_LLM_BASE_URL");
  ::unsetenv("KGSYNTH_LLM_MODEL");
  ::unsetenv("KGSYNTH_LLM_API_KEY");
  EXPECT_TRUE(c.configured());
  EXPECT_EQ(c.model, "m");
  EXPECT_EQ(c.api_key, "k");
  EXPECT_FALSE(LlmConfig::from_env().configured());
}

}  // namespace
}  // namespace kgsynth
