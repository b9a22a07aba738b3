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

#include "kgsynth/entity_set.h"
#include "oracles.h"
#include "test_util.h"

namespace kgsynth {
namespace {

EntitySet S(std::initializer_list<std::uint32_t> v) {
  std::vector<EntityId> ids;
  for (auto x : v) ids.push_back(EntityId{x});
  return EntitySet::from_unsorted(ids);
}

TEST(EntitySet, SortsAndDeduplicates) {
  EntitySet s = S({5, 1, 3, 1, 5});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(oracle::as_vector(s),
            (std::vector<EntityId>{EntityId{1}, EntityId{3}, EntityId{5}}));
  EXPECT_TRUE(s.contains(EntityId{3}));
  EXPECT_FALSE(s.contains(EntityId{2}));
}

TEST(EntitySet, Definitions) {
  EXPECT_EQ(intersect(S({0, 1}), S({1, 2})), S({1}));
  EXPECT_EQ(unite(S({0}), S({1})), S({0, 1}));
  EXPECT_EQ(relative_complement(S({0, 1}), S({1})), S({0}));
  EXPECT_EQ(intersect(S({0, 1}), S({0, 1})), S({0, 1}));
  EXPECT_EQ(unite(S({4}), S({})), S({4}));
  EXPECT_EQ(relative_complement(S({2, 3}), S({})), S({2, 3}));
  EXPECT_EQ(relative_complement(S({2, 3}), S({2, 3})), S({}));
}

TEST(EntitySet, ProjectDefinitions) {
  KnowledgeGraph g = testing::graph_from({{"a", "r", "b"}, {"c", "r", "b"}});
  RelationRef r = testing::fwd(g, "r");
  EXPECT_TRUE(project(g, {}, r).empty());
  EntitySet from{testing::id(g, "a"), testing::id(g, "c")};
  EXPECT_EQ(project(g, from, r), EntitySet{testing::id(g, "b")});
  EXPECT_EQ(project(g, EntitySet{testing::id(g, "b")}, r.inverse()), from);
}

TEST(EntitySetProperty, MatchesNaiveOracles) {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    EntitySet a = oracle::random_set(rng, 60, 30);
    EntitySet b = oracle::random_set(rng, 60, 30);
    auto va = oracle::as_vector(a), vb = oracle::as_vector(b);
    ASSERT_EQ(oracle::to_set(intersect(a, b)), oracle::intersect(va, vb));
    ASSERT_EQ(oracle::to_set(unite(a, b)), oracle::unite(va, vb));
    ASSERT_EQ(oracle::to_set(relative_complement(a, b)), oracle::minus(va, vb));
  }
}

TEST(EntitySetProperty, ProjectMatchesScanAndDistributes) {
  KnowledgeGraph g = testing::make_graph({.entities = 150, .relations = 6,
                                          .triples = 1000, .types = 3, .seed = 4});
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    EntitySet a = oracle::random_set(rng, g.num_entities(), 20);
    EntitySet b = oracle::random_set(rng, g.num_entities(), 20);
    RelationRef r{RelationId{static_cast<std::uint32_t>(rng.uniform(g.num_relations()))},
                  rng.bernoulli(0.5) ? Direction::kInverse : Direction::kForward};
    ASSERT_EQ(oracle::to_set(project(g, a, r)), oracle::project(g, oracle::to_set(a), r));
    ASSERT_EQ(project(g, unite(a, b), r), unite(project(g, a, r), project(g, b, r)));
  }
}

}  // namespace
}  // namespace kgsynth
