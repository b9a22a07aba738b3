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

#include "kgsynth/fol.h"

#include <algorithm>
#include <string>

#include "kgsynth/error.h"
#include "kgsynth/patterns.h"

namespace kgsynth {

namespace {

constexpr std::array<std::string_view, 14> kPatternNames = {
    "1p", "2p", "3p", "2i", "3i", "pi", "ip",
    "2u", "up", "2in", "3in", "inp", "pin", "pni",
};

[[noreturn]] void contract(const std::string& message) {
  throw Error(ErrorCode::kContract, message);
}

void collect_slots(const FolNode& node, const FolNode* parent,
                   std::vector<int>& anchors, std::vector<int>& relations) {
  switch (node.kind) {
    case NodeKind::kAnchor:
      if (!node.children.empty()) contract("anchor with children");
      anchors.push_back(node.slot);
      break;
    case NodeKind::kProjection:
      if (node.children.size() != 1) contract("projection needs one child");
      relations.push_back(node.slot);
      break;
    case NodeKind::kIntersection: {
      if (node.children.size() < 2 || node.children.size() > 3) {
        contract("intersection needs two or three children");
      }
      bool positive = std::any_of(
          node.children.begin(), node.children.end(),
          [](const FolNode& c) { return c.kind != NodeKind::kNegation; });
      if (!positive) contract("intersection without a non-negated child");
      break;
    }
    case NodeKind::kUnion:
      if (node.children.size() != 2) contract("union needs two children");
      break;
    case NodeKind::kNegation:
      if (node.children.size() != 1) contract("negation needs one child");
      if (parent == nullptr || parent->kind != NodeKind::kIntersection) {
        contract("negation outside an intersection");
      }
      break;
  }
  if (node.kind != NodeKind::kAnchor && node.kind != NodeKind::kProjection &&
      node.slot != -1) {
    contract("logical operator carries a slot");
  }
  for (const FolNode& c : node.children) {
    collect_slots(c, &node, anchors, relations);
  }
}

void check_dense(std::vector<int> slots, const char* what) {
  std::sort(slots.begin(), slots.end());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] != static_cast<int>(i)) {
      contract(std::string(what) + " slots are not dense");
    }
  }
}

// Memoized truth vector over all entities for one node.
using Truth = std::vector<char>;

Truth truth_of(const KnowledgeGraph& g, const FolNode& node,
               const Bindings& b) {
  const std::size_t n = g.num_entities();
  Truth out(n, 0);
  switch (node.kind) {
    case NodeKind::kAnchor:
      out[b.anchors[node.slot].value] = 1;
      break;
    case NodeKind::kProjection: {
      Truth in = truth_of(g, node.children[0], b);
      RelationRef r = b.relations[node.slot];
      // x is in the projection iff some assignment y with in[y] has the
      // triple (y, r, x); every candidate pair is a row of the table.
      for (const Triple& t : g.triples()) {
        if (t.relation != r.id) continue;
        EntityId from = r.is_inverse() ? t.tail : t.head;
        EntityId to = r.is_inverse() ? t.head : t.tail;
        if (in[from.value]) out[to.value] = 1;
      }
      break;
    }
    case NodeKind::kIntersection: {
      std::fill(out.begin(), out.end(), 1);
      for (const FolNode& c : node.children) {
        Truth part = truth_of(g, c, b);
        for (std::size_t i = 0; i < n; ++i) out[i] = out[i] && part[i];
      }
      break;
    }
    case NodeKind::kUnion:
      for (const FolNode& c : node.children) {
        Truth part = truth_of(g, c, b);
        for (std::size_t i = 0; i < n; ++i) out[i] = out[i] || part[i];
      }
      break;
    case NodeKind::kNegation: {
      Truth inner = truth_of(g, node.children[0], b);
      for (std::size_t i = 0; i < n; ++i) out[i] = !inner[i];
      break;
    }
  }
  return out;
}

void check_bindings(const KnowledgeGraph& g, const Bindings& b) {
  for (EntityId e : b.anchors) {
    if (e.value >= g.num_entities()) {
      throw Error(ErrorCode::kUnknownId,
                  "unknown entity id " + std::to_string(e.value));
    }
  }
  for (RelationRef r : b.relations) {
    if (r.id.value >= g.num_relations()) {
      throw Error(ErrorCode::kUnknownId,
                  "unknown relation id " + std::to_string(r.id.value));
    }
  }
}

}  // namespace

std::string_view pattern_name(PatternTag tag) {
  return kPatternNames[static_cast<std::size_t>(tag)];
}

std::optional<PatternTag> pattern_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kPatternNames.size(); ++i) {
    if (kPatternNames[i] == name) return kAllPatterns[i];
  }
  return std::nullopt;
}

FolNode FolNode::anchor(int slot) { return {NodeKind::kAnchor, slot, {}}; }

FolNode FolNode::projection(FolNode child, int slot) {
  FolNode n{NodeKind::kProjection, slot, {}};
  n.children.push_back(std::move(child));
  return n;
}

FolNode FolNode::intersection(std::vector<FolNode> children) {
  return {NodeKind::kIntersection, -1, std::move(children)};
}

FolNode FolNode::union_of(std::vector<FolNode> children) {
  return {NodeKind::kUnion, -1, std::move(children)};
}

FolNode FolNode::negation(FolNode child) {
  FolNode n{NodeKind::kNegation, -1, {}};
  n.children.push_back(std::move(child));
  return n;
}

SlotCounts validate_structure(const FolNode& root) {
  if (root.kind == NodeKind::kNegation) contract("negation at the root");
  std::vector<int> anchors;
  std::vector<int> relations;
  collect_slots(root, nullptr, anchors, relations);
  check_dense(anchors, "anchor");
  check_dense(relations, "relation");
  return {static_cast<int>(anchors.size()), static_cast<int>(relations.size())};
}

FolQuery make_query(PatternTag pattern, std::vector<EntityId> anchors,
                    std::vector<RelationRef> relations) {
  const PatternInfo& info = pattern_info(pattern);
  if (static_cast<int>(anchors.size()) != info.slots.anchors ||
      static_cast<int>(relations.size()) != info.slots.relations) {
    contract("binding count mismatch for pattern " +
             std::string(info.name));
  }
  return {pattern, info.shape, std::move(anchors), std::move(relations)};
}

EntitySet evaluate(const KnowledgeGraph& g, const FolNode& node,
                   const Bindings& b) {
  switch (node.kind) {
    case NodeKind::kAnchor:
      return EntitySet{b.anchors[node.slot]};
    case NodeKind::kProjection:
      return project(g, evaluate(g, node.children[0], b),
                     b.relations[node.slot]);
    case NodeKind::kIntersection: {
      std::vector<EntitySet> positive;
      std::vector<const FolNode*> negated;
      for (const FolNode& c : node.children) {
        if (c.kind == NodeKind::kNegation) {
          negated.push_back(&c.children[0]);
        } else {
          positive.push_back(evaluate(g, c, b));
        }
      }
      if (positive.empty()) contract("intersection without a positive child");
      std::stable_sort(positive.begin(), positive.end(),
                       [](const EntitySet& x, const EntitySet& y) {
                         return x.size() < y.size();
                       });
      EntitySet acc = std::move(positive.front());
      for (std::size_t i = 1; i < positive.size(); ++i) {
        acc = intersect(acc, positive[i]);
      }
      for (const FolNode* n : negated) {
        if (acc.empty()) break;
        acc = relative_complement(acc, evaluate(g, *n, b));
      }
      return acc;
    }
    case NodeKind::kUnion: {
      EntitySet acc;
      for (const FolNode& c : node.children) {
        acc = unite(acc, evaluate(g, c, b));
      }
      return acc;
    }
    case NodeKind::kNegation:
      contract("negation outside an intersection");
  }
  contract("unknown node kind");
}

AnswerSet evaluate(const KnowledgeGraph& g, const FolQuery& q) {
  SlotCounts slots = validate_structure(q.root);
  if (static_cast<int>(q.anchors.size()) != slots.anchors ||
      static_cast<int>(q.relations.size()) != slots.relations) {
    contract("query is not fully instantiated");
  }
  check_bindings(g, q.bindings());
  return evaluate(g, q.root, q.bindings());
}

AnswerSet brute_force_evaluate(const KnowledgeGraph& g, const FolQuery& q,
                               std::size_t max_entities) {
  if (g.num_entities() > max_entities) {
    throw Error(ErrorCode::kOracleTooLarge,
                "oracle limited to " + std::to_string(max_entities) +
                    " entities, graph has " +
                    std::to_string(g.num_entities()));
  }
  SlotCounts slots = validate_structure(q.root);
  if (static_cast<int>(q.anchors.size()) != slots.anchors ||
      static_cast<int>(q.relations.size()) != slots.relations) {
    contract("query is not fully instantiated");
  }
  check_bindings(g, q.bindings());
  Truth truth = truth_of(g, q.root, q.bindings());
  std::vector<EntityId> answers;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) answers.push_back(EntityId{static_cast<std::uint32_t>(i)});
  }
  return EntitySet::from_unsorted(std::move(answers));
}

}  // namespace kgsynth
