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

#include <regex>
#include <set>

#include "fake_llm.h"
#include "json.hpp"
#include "kgsynth/api_gen.h"
#include "kgsynth/error.h"
#include "test_util.h"

namespace kgsynth {
namespace {

const RelationRef kFwd{RelationId{0}, Direction::kForward};
const RelationRef kInv{RelationId{0}, Direction::kInverse};

bool schema_ok(const ApiDescriptor& api) {
  static const std::regex name_re("^[a-z][a-z0-9_]*$");
  if (!std::regex_match(api.name, name_re) || api.description.empty()) return false;
  if (!api.is_logical() && api.parameters.empty()) return false;
  for (const ApiParam& p : api.parameters) {
    if (!std::regex_match(p.name, name_re) || p.type.empty()) return false;
  }
  return !api.returns_type.empty();
}

TEST(ApiGen, TemplateForwardName) {
  ApiDescriptor api = derive_api_template("/people/person/university", kFwd);
  EXPECT_EQ(api.name, "get_university_of_person");
  EXPECT_EQ(api.mode, ApiMode::kTemplate);
  EXPECT_FALSE(api.flagged);
  ASSERT_EQ(api.parameters.size(), 1u);
  EXPECT_EQ(api.relation, kFwd);
  EXPECT_TRUE(schema_ok(api));
}

TEST(ApiGen, TemplateTokens) {
  EXPECT_EQ(derive_api_template("/r/x/y", kFwd).name, "get_y_of_x");
  EXPECT_EQ(derive_api_template("/r/x/y", kInv).name, "get_x_with_y");
  EXPECT_EQ(derive_api_template("capital", kFwd).name, "get_capital_of_entity");
  TypeTokens t = relation_type_tokens("/film/Film Genre/Award-Winner");
  EXPECT_EQ(t.head, "film_genre");
  EXPECT_EQ(t.tail, "award_winner");
}

TEST(ApiGen, UnparseableRelationFallsBackFlagged) {
  ApiDescriptor api = derive_api_template("///", kFwd);
  EXPECT_TRUE(api.flagged);
  EXPECT_TRUE(is_valid_api_name(api.name)) << api.name;
  ApiDescriptor inv = derive_api_template("/42/%%", kInv);
  EXPECT_TRUE(is_valid_api_name(inv.name)) << inv.name;
}

TEST(ApiGen, NameValidation) {
  EXPECT_TRUE(is_valid_api_name("get_a_of_b"));
  EXPECT_FALSE(is_valid_api_name("Get"));
  EXPECT_FALSE(is_valid_api_name("1abc"));
  EXPECT_FALSE(is_valid_api_name(""));
  EXPECT_FALSE(is_valid_api_name("a-b"));
  EXPECT_EQ(api_phrase("get_university_of_person"), "university of person");
  EXPECT_EQ(sanitize_token("  Foo--Bar  "), "foo_bar");
}

TEST(ApiGen, TemplateIsPure) {
  EXPECT_EQ(derive_api_template("/a/b/c", kInv), derive_api_template("/a/b/c", kInv));
}

TEST(ApiGen, LogicalApis) {
  const auto& apis = logical_apis();
  ASSERT_EQ(apis.size(), 3u);
  EXPECT_EQ(apis[0].name, "get_intersection_of");
  EXPECT_EQ(apis[1].name, "get_union_of");
  EXPECT_EQ(apis[2].name, "get_negation_of");
  EXPECT_EQ(apis[2].parameters[0].name, "candidates");
  EXPECT_EQ(apis[2].parameters[1].name, "exclude");
  for (const auto& a : apis) {
    EXPECT_TRUE(a.is_logical());
    EXPECT_TRUE(schema_ok(a));
  }
  EXPECT_EQ(&logical_apis(), &apis);
}

TEST(ApiGen, DescriptorJsonKeyOrder) {
  std::string s = descriptor_json(derive_api_template("/a/b/c", kFwd));
  auto pos = [&](const char* k) { return s.find(std::string("\"") + k + "\""); };
  EXPECT_LT(pos("name"), pos("description"));
  EXPECT_LT(pos("description"), pos("parameters"));
  EXPECT_LT(pos("parameters"), pos("returns"));
  auto j = nlohmann::json::parse(s);
  EXPECT_EQ(j["name"], "get_c_of_b");
  EXPECT_EQ(j["returns"]["type"], "entity_list");
}

TEST(ApiGen, LlmModeUsesModelName) {
  auto t = std::make_shared<testing::FakeTransport>();
  t->push_text("Sure: {\"name\": \"get_winners\", \"description\": \"Returns the winners of an award.\"}");
  LlmClient client(testing::fake_config(), t);
  ApiDescriptor api = derive_api_llm("/award/award/winner", kInv, client,
                                     default_api_prompts());
  EXPECT_EQ(api.name, "get_winners");
  EXPECT_EQ(api.mode, ApiMode::kLlm);
  EXPECT_FALSE(api.flagged);
  EXPECT_TRUE(schema_ok(api));
  auto body = nlohmann::json::parse(t->bodies().at(0));
  std::string prompt = body["messages"].back()["content"];
  EXPECT_NE(prompt.find("/award/award/winner"), std::string::npos);
  EXPECT_EQ(prompt.find("{relation}"), std::string::npos);
}

TEST(ApiGen, LlmMalformedNameFallsBack) {
  auto t = std::make_shared<testing::FakeTransport>();
  t->push_text("{\"name\": \"Get Winners!\", \"description\": \"x\"}");
  t->push_text("no json here");
  t->push_text("{\"name\": \"ok_name\"}");
  t->push_text("{\"name\": \"never_reached\", \"description\": \"y\"}");
  LlmClient client(testing::fake_config(), t);
  ApiDescriptor api = derive_api_llm("/a/b/c", kFwd, client, default_api_prompts());
  EXPECT_EQ(t->calls(), 3u);
  EXPECT_TRUE(api.flagged);
  EXPECT_EQ(api.name, "get_c_of_b");
}

TEST(ApiGen, LlmClientFailureFallsBack) {
  LlmClient offline(LlmConfig{});
  ApiDescriptor api = derive_api_llm("/a/b/c", kFwd, offline, default_api_prompts());
  EXPECT_TRUE(api.flagged);
  EXPECT_EQ(api.mode, ApiMode::kTemplate);
}

TEST(ApiGenProperty, LlmRepliesPassSchema) {
  KnowledgeGraph g = testing::make_graph({.entities = 300, .relations = 50,
                                          .triples = 2000, .seed = 3});
  auto t = std::make_shared<testing::FakeTransport>();
  int n = 0;
  t->set_fallback([&n](const std::string&) {
    return "{\"name\": \"get_thing_" + std::to_string(n++ % 7) +
           "\", \"description\": \"Returns related things.\"}";
  });
  LlmClient client(testing::fake_config(), t);
  ApiRegistry reg = ApiRegistry::build(g, ApiMode::kLlm, &client);
  std::set<std::string> names;
  for (const ApiDescriptor& api : reg.all()) {
    EXPECT_TRUE(schema_ok(api)) << api.name;
    EXPECT_TRUE(names.insert(api.name).second) << api.name;
  }
  EXPECT_EQ(reg.all().size(), 3 + 2 * g.num_relations());
  EXPECT_GT(reg.collisions(), 0u);
}

TEST(ApiRegistry, CoversEveryRelationBothWays) {
  KnowledgeGraph g = testing::make_graph({.entities = 400, .relations = 80,
                                          .triples = 3000, .seed = 4});
  ApiRegistry reg = ApiRegistry::build(g, ApiMode::kTemplate);
  std::set<std::string> names;
  for (const ApiDescriptor& api : reg.all()) {
    EXPECT_TRUE(schema_ok(api)) << api.name;
    EXPECT_TRUE(names.insert(api.name).second);
  }
  for (std::uint32_t r = 0; r < g.num_relations(); ++r) {
    for (Direction d : {Direction::kForward, Direction::kInverse}) {
      const ApiDescriptor& api = reg.for_relation({RelationId{r}, d});
      EXPECT_EQ(api.relation, (RelationRef{RelationId{r}, d}));
      EXPECT_EQ(reg.find(api.name), &api);
    }
  }
  EXPECT_EQ(reg.find("get_nothing"), nullptr);
}

TEST(ApiRegistry, CollisionsGetSuffixes) {
  KnowledgeGraph g = testing::graph_from({{"a", "/x/p/q", "b"}, {"a", "/y/p/q", "c"},
                                          {"a", "/z/p/q", "d"}});
  ApiRegistry reg = ApiRegistry::build(g, ApiMode::kTemplate);
  EXPECT_EQ(reg.for_relation({RelationId{0}}).name, "get_q_of_p");
  EXPECT_EQ(reg.for_relation({RelationId{1}}).name, "get_q_of_p_2");
  EXPECT_EQ(reg.for_relation({RelationId{2}}).name, "get_q_of_p_3");
  EXPECT_EQ(reg.collisions(), 4u);
}

TEST(ApiRegistry, LinesRoundTrip) {
  KnowledgeGraph g = testing::make_graph({.relations = 20, .seed = 6});
  ApiRegistry reg = ApiRegistry::build(g, ApiMode::kTemplate);
  std::vector<std::string> lines = reg.to_lines(g);
  ApiRegistry back = ApiRegistry::from_lines(g, lines);
  ASSERT_EQ(back.all().size(), reg.all().size());
  for (std::size_t i = 0; i < reg.all().size(); ++i) {
    EXPECT_EQ(back.all()[i], reg.all()[i]);
  }
  lines.push_back(lines.back());
  try {
    ApiRegistry::from_lines(g, lines);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIntegrity);
  }
}

TEST(Toolset, CountsAndDeterminism) {
  KnowledgeGraph g = testing::make_graph({.relations = 12, .seed = 6});
  ApiRegistry reg = ApiRegistry::build(g, ApiMode::kTemplate);
  std::vector<std::string> used = {reg.all()[5].name, reg.all()[7].name,
                                   std::string(kIntersectionApi)};
  Rng r0(1);
  Toolset none = build_toolset(used, reg, 0, r0);
  EXPECT_EQ(none.size(), 3u);
  Rng r1(1), r2(1);
  Toolset a = build_toolset(used, reg, 5, r1);
  Toolset b = build_toolset(used, reg, 5, r2);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 8u);
  std::set<const ApiDescriptor*> distinct(a.begin(), a.end());
  EXPECT_EQ(distinct.size(), 8u);
  for (const std::string& u : used) EXPECT_TRUE(distinct.count(reg.find(u)));
  Rng r3(1);
  try {
    build_toolset(used, reg, reg.all().size(), r3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContract);
  }
  Rng r4(1);
  std::vector<std::string> bogus = {"get_bogus"};
  try {
    build_toolset(bogus, reg, 0, r4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownApi);
  }
}

}  // namespace
}  // namespace kgsynth
