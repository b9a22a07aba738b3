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

#include <algorithm>
#include <set>
#include <vector>

#include "kgsynth/entity_set.h"
#include "kgsynth/fol.h"
#include "kgsynth/kg_store.h"
#include "kgsynth/rng.h"

// Reference implementations kept deliberately naive: no sorting tricks, no
// indexes, only membership tests and full scans of the triple list.
namespace kgsynth::oracle {

inline std::vector<EntityId> as_vector(const EntitySet& s) {
  return {s.begin(), s.end()};
}

inline bool member(const std::vector<EntityId>& v, EntityId e) {
  for (EntityId x : v) {
    if (x == e) return true;
  }
  return false;
}

inline std::set<EntityId> intersect(const std::vector<EntityId>& a,
                                    const std::vector<EntityId>& b) {
  std::set<EntityId> out;
  for (EntityId x : a) {
    if (member(b, x)) out.insert(x);
  }
  return out;
}

inline std::set<EntityId> unite(const std::vector<EntityId>& a,
                                const std::vector<EntityId>& b) {
  std::set<EntityId> out(a.begin(), a.end());
  out.insert(b.begin(), b.end());
  return out;
}

inline std::set<EntityId> minus(const std::vector<EntityId>& a,
                                const std::vector<EntityId>& b) {
  std::set<EntityId> out;
  for (EntityId x : a) {
    if (!member(b, x)) out.insert(x);
  }
  return out;
}

inline std::set<EntityId> to_set(const EntitySet& s) { return {s.begin(), s.end()}; }

inline std::set<EntityId> project(const KnowledgeGraph& g,
                                  const std::set<EntityId>& from, RelationRef r) {
  std::set<EntityId> out;
  for (const Triple& t : g.triples()) {
    if (t.relation != r.id) continue;
    EntityId src = r.is_inverse() ? t.tail : t.head;
    EntityId dst = r.is_inverse() ? t.head : t.tail;
    if (from.count(src)) out.insert(dst);
  }
  return out;
}

// Reads a negated child as the complement over all entities.
inline std::set<EntityId> evaluate(const KnowledgeGraph& g, const FolNode& n,
                                   const FolQuery& q) {
  std::set<EntityId> all;
  for (std::uint32_t i = 0; i < g.num_entities(); ++i) all.insert(EntityId{i});
  switch (n.kind) {
    case NodeKind::kAnchor:
      return {q.anchors[n.slot]};
    case NodeKind::kProjection:
      return project(g, evaluate(g, n.children[0], q), q.relations[n.slot]);
    case NodeKind::kUnion: {
      std::set<EntityId> out;
      for (const FolNode& c : n.children) {
        auto s = evaluate(g, c, q);
        out.insert(s.begin(), s.end());
      }
      return out;
    }
    case NodeKind::kIntersection: {
      std::set<EntityId> out = all;
      for (const FolNode& c : n.children) {
        std::set<EntityId> s = evaluate(g, c, q);
        std::set<EntityId> next;
        for (EntityId e : out) {
          if (s.count(e)) next.insert(e);
        }
        out = std::move(next);
      }
      return out;
    }
    case NodeKind::kNegation: {
      std::set<EntityId> inner = evaluate(g, n.children[0], q);
      std::set<EntityId> out;
      for (EntityId e : all) {
        if (!inner.count(e)) out.insert(e);
      }
      return out;
    }
  }
  return {};
}

inline std::set<EntityId> evaluate(const KnowledgeGraph& g, const FolQuery& q) {
  return evaluate(g, q.root, q);
}

// Random sorted-unique subset of [0, universe).
inline EntitySet random_set(Rng& rng, std::uint32_t universe, std::size_t max_size) {
  std::vector<EntityId> ids;
  std::size_t n = rng.uniform(max_size + 1);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(EntityId{static_cast<std::uint32_t>(rng.uniform(universe))});
  }
  return EntitySet::from_unsorted(std::move(ids));
}

}  // namespace kgsynth::oracle
