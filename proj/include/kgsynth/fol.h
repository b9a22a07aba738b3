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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kgsynth/entity_set.h"
#include "kgsynth/kg_store.h"

namespace kgsynth {

enum class PatternTag : std::uint8_t {
  k1p, k2p, k3p, k2i, k3i, kPi, kIp, k2u, kUp, k2in, k3in, kInp, kPin, kPni,
};

inline constexpr std::array<PatternTag, 14> kAllPatterns = {
    PatternTag::k1p,  PatternTag::k2p,  PatternTag::k3p, PatternTag::k2i,
    PatternTag::k3i,  PatternTag::kPi,  PatternTag::kIp, PatternTag::k2u,
    PatternTag::kUp,  PatternTag::k2in, PatternTag::k3in, PatternTag::kInp,
    PatternTag::kPin, PatternTag::kPni,
};

std::string_view pattern_name(PatternTag tag);
std::optional<PatternTag> pattern_from_name(std::string_view name);

enum class NodeKind : std::uint8_t {
  kAnchor,
  kProjection,
  kIntersection,
  kUnion,
  kNegation,
};

// One node of a query operator tree. The root produces the free variable.
// `slot` indexes the anchor binding (anchors) or the relation binding
// (projections) and is -1 for the logical operators.
struct FolNode {
  NodeKind kind = NodeKind::kAnchor;
  int slot = -1;
  std::vector<FolNode> children;

  static FolNode anchor(int slot);
  static FolNode projection(FolNode child, int slot);
  static FolNode intersection(std::vector<FolNode> children);
  static FolNode union_of(std::vector<FolNode> children);
  static FolNode negation(FolNode child);

  bool operator==(const FolNode&) const = default;
};

struct SlotCounts {
  int anchors = 0;
  int relations = 0;
};

// Checks the tree invariants: anchors are leaves, projections have one
// child, unions two, intersections two or three with at least one
// non-negated child, and negation sits directly under an intersection.
// Slots must be dense. Throws kContract.
SlotCounts validate_structure(const FolNode& root);

struct Bindings {
  std::span<const EntityId> anchors;
  std::span<const RelationRef> relations;
};

// An instantiated query: a catalogued shape plus its slot bindings.
struct FolQuery {
  PatternTag pattern = PatternTag::k1p;
  FolNode root;
  std::vector<EntityId> anchors;
  std::vector<RelationRef> relations;

  Bindings bindings() const { return {anchors, relations}; }
  bool operator==(const FolQuery&) const = default;
};

// Builds a query over the catalogued shape of `pattern`; throws kContract
// when the binding counts do not match the shape.
FolQuery make_query(PatternTag pattern, std::vector<EntityId> anchors,
                    std::vector<RelationRef> relations);

using AnswerSet = EntitySet;

// Post-order set evaluation over the indexes. Negated children are applied
// as a relative complement against the intersection of their siblings.
AnswerSet evaluate(const KnowledgeGraph& g, const FolQuery& q);
EntitySet evaluate(const KnowledgeGraph& g, const FolNode& node,
                   const Bindings& bindings);

// Independent oracle: decides membership of every entity by enumerating
// witnesses over the raw triple table, reading negation as a complement
// against the whole entity set. Refuses graphs above `max_entities`.
AnswerSet brute_force_evaluate(const KnowledgeGraph& g, const FolQuery& q,
                               std::size_t max_entities = 10000);

}  // namespace kgsynth
