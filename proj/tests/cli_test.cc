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

#include <sstream>

#include "fake_llm.h"
#include "json.hpp"
#include "kgsynth/digest.h"
#include "kgsynth/instruction.h"
#include "kgsynth/pipeline.h"
#include "test_util.h"

namespace kgsynth {
namespace {

using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args, LlmClient* client = nullptr) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err, client);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::write_graph({.entities = 150, .relations = 10, .triples = 900,
                          .types = 4, .seed = 2},
                         kg());
  }
  std::string kg() const { return (dir_ / "kg.tsv").string(); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  testing::TempDir dir_;
};

TEST_F(CliTest, SynthSmoke) {
  CliRun r = cli({"synth", "--kg", kg(), "--patterns", "1p", "--per-pattern", "2",
               "--seed", "7", "--translator", "template", "--out", path("ds.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = read_lines(path("ds.jsonl"));
  std::set<std::string> samples;
  for (const auto& l : lines) samples.insert(json::parse(l)["meta"]["sample_id"]);
  EXPECT_EQ(samples.size(), 2u);
  json m = json::parse(testing::slurp(path("ds.jsonl.manifest.json")));
  EXPECT_EQ(m["dataset"]["pairs"], 2);
  EXPECT_EQ(m["dataset"]["records"], lines.size());
  EXPECT_EQ(m["dataset"]["sha256"], sha256_file(path("ds.jsonl")));
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["kg"]["sha256"], sha256_file(kg()));
  EXPECT_EQ(m["config"]["translator"], "template");
}

TEST_F(CliTest, VerifyDetectsOneByteTamper) {
  ASSERT_EQ(cli({"synth", "--kg", kg(), "--patterns", "2p,pni", "--per-pattern", "3",
                 "--seed", "1", "--out", path("ds.jsonl")})
                .code,
            0);
  CliRun ok = cli({"verify", path("ds.jsonl")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("step mismatches: 0"), std::string::npos);

  auto lines = read_lines(path("ds.jsonl"));
  std::size_t target = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (json::parse(lines[i])["meta"]["kind"] == "trajectory") target = i;
  }
  json rec = json::parse(lines[target]);
  for (auto& turn : rec["conversations"]) {
    if (turn["from"] != "observation") continue;
    std::string v = turn["value"];
    std::size_t digit = v.find_last_of("0123456789");
    v[digit] = v[digit] == '9' ? '8' : static_cast<char>(v[digit] + 1);
    turn["value"] = v;
    break;
  }
  lines[target] = rec.dump();
  write_lines(path("ds.jsonl"), lines);
  CliRun bad = cli({"verify", path("ds.jsonl")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("result: FAIL"), std::string::npos);
  std::string where = "line " + std::to_string(target + 1) + " (" +
                      rec["meta"]["id"].get<std::string>() + ")";
  EXPECT_NE(bad.err.find(where), std::string::npos) << bad.err;
}

TEST_F(CliTest, AlpacaRoundTripVerifies) {
  ASSERT_EQ(cli({"synth", "--kg", kg(), "--patterns", "up,3in", "--per-pattern", "4",
                 "--seed", "3", "--format", "alpaca-jsonl", "--out", path("a.jsonl")})
                .code,
            0);
  auto first = json::parse(read_lines(path("a.jsonl")).at(0));
  EXPECT_TRUE(first.contains("instruction"));
  CliRun v = cli({"verify", path("a.jsonl")});
  EXPECT_EQ(v.code, 0) << v.err;
}

TEST_F(CliTest, ValidationFailuresExitOne) {
  CliRun no_seed = cli({"synth", "--kg", kg(), "--per-pattern", "1", "--out", path("x")});
  EXPECT_EQ(no_seed.code, 1);
  EXPECT_NE(no_seed.err.find("error[E_INVALID_CONFIG]: seed"), std::string::npos)
      << no_seed.err;
  EXPECT_EQ(cli({"synth", "--kg", kg(), "--patterns", "9q", "--per-pattern", "1",
                 "--seed", "1", "--out", path("x")})
                .code,
            1);
  EXPECT_EQ(cli({"synth", "--kg", kg(), "--per-pattern", "-3", "--seed", "1"}).code, 1);
  EXPECT_EQ(cli({"synth", "--kg", kg(), "--per-pattern", "1", "--seed", "1",
                 "--review-prob", "1.5", "--out", path("x")})
                .code,
            1);
  EXPECT_EQ(cli({"synth", "--kg", kg(), "--per-pattern", "1", "--seed", "1",
                 "--format", "csv", "--out", path("x")})
                .code,
            1);
  EXPECT_EQ(cli({"synth", "--bogus"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"verify"}).code, 1);
  CliRun missing = cli({"stats", "--kg", path("missing.tsv")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("error[E_IO]"), std::string::npos);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, StatsSampleAndGenApis) {
  CliRun s = cli({"stats", "--kg", kg()});
  ASSERT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("triples: 900"), std::string::npos);
  CliRun sample = cli({"sample", "--kg", kg(), "--patterns", "ip", "--per-pattern", "3",
                    "--seed", "4"});
  ASSERT_EQ(sample.code, 0) << sample.err;
  std::istringstream lines(sample.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(json::parse(line)["pattern"], "ip");
    ++n;
  }
  EXPECT_EQ(n, 3);
  CliRun apis = cli({"gen-apis", "--kg", kg(), "--out", path("apis.jsonl")});
  ASSERT_EQ(apis.code, 0);
  EXPECT_EQ(read_lines(path("apis.jsonl")).size(), 3u + 20u);

  ASSERT_EQ(cli({"synth", "--kg", kg(), "--patterns", "2u", "--per-pattern", "2",
                 "--seed", "4", "--out", path("d.jsonl")})
                .code,
            0);
  CliRun ds = cli({"stats", path("d.jsonl")});
  ASSERT_EQ(ds.code, 0) << ds.err;
  EXPECT_NE(ds.out.find("pairs: 2"), std::string::npos);
  EXPECT_NE(ds.out.find("pattern 2u: 2 pairs"), std::string::npos) << ds.out;
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << json{{"kg", kg()}, {"patterns", {"1p"}}, {"per_pattern", 3},
                {"seed", 11}, {"out", path("c.jsonl")}}
               .dump();
  }
  ASSERT_EQ(cli({"synth", "--config", path("cfg.json"), "--per-pattern", "2"}).code, 0);
  json m = json::parse(testing::slurp(path("c.jsonl.manifest.json")));
  EXPECT_EQ(m["dataset"]["pairs"], 2);
  EXPECT_EQ(m["seed"], 11);
  {
    std::ofstream cfg(path("bad.json"));
    cfg << "{\"per_pattern\": \"many\"}";
  }
  CliRun bad = cli({"synth", "--config", path("bad.json")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("per_pattern"), std::string::npos);
}

TEST_F(CliTest, LlmModeRecordsProvenanceAndVerifiesOffline) {
  auto t = std::make_shared<testing::FakeTransport>();
  std::atomic<int> named{0};
  t->set_fallback([&named](const std::string& prompt) -> std::string {
    if (prompt.find("Head type:") != std::string::npos) {
      return "{\"name\": \"get_llm_api_" + std::to_string(named++) +
             "\", \"description\": \"Model-written description.\"}";
    }
    return "Which entities does the model ask about?";
  });
  LlmClient client(testing::fake_config(), t);
  CliRun r = cli({"synth", "--kg", kg(), "--patterns", "2i", "--per-pattern", "3",
               "--seed", "5", "--translator", "llm", "--out", path("l.jsonl")},
              &client);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(t->calls(), 0u);
  json m = json::parse(testing::slurp(path("l.jsonl.manifest.json")));
  EXPECT_EQ(m["llm_requests"], t->calls());
  bool saw_llm = false;
  for (const auto& l : read_lines(path("l.jsonl"))) {
    json meta = json::parse(l)["meta"];
    saw_llm |= meta["translation_mode"] == "llm";
  }
  EXPECT_TRUE(saw_llm);
  EXPECT_EQ(named.load(), 20);
  EXPECT_NE(read_lines(path("l.jsonl.apis.jsonl"))[3].find("get_llm_api_"), std::string::npos);
  LlmClient offline(LlmConfig{}, t);
  const std::size_t before = t->calls();
  CliRun v = cli({"verify", path("l.jsonl")}, &offline);
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(t->calls(), before);
}

TEST_F(CliTest, OfflineRunMakesNoCalls) {
  auto t = std::make_shared<testing::FakeTransport>();
  LlmClient offline(LlmConfig{}, t);
  for (const char* mode : {"template", "llm"}) {
    CliRun r = cli({"synth", "--kg", kg(), "--patterns", "all", "--per-pattern", "2",
                 "--seed", "9", "--translator", mode, "--out", path("o.jsonl")},
                &offline);
    EXPECT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(t->calls(), 0u);
  EXPECT_EQ(offline.requests(), 0u);
}

}  // namespace
}  // namespace kgsynth
