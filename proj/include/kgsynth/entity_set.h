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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "kgsynth/kg_store.h"

namespace kgsynth {

// Sorted, duplicate-free set of entities.
class EntitySet {
 public:
  using const_iterator = std::vector<EntityId>::const_iterator;

  EntitySet() = default;
  EntitySet(std::initializer_list<EntityId> ids);

  static EntitySet from_unsorted(std::vector<EntityId> ids);
  static EntitySet from_sorted(std::span<const EntityId> ids);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(EntityId e) const;
  const_iterator begin() const { return ids_.begin(); }
  const_iterator end() const { return ids_.end(); }
  std::span<const EntityId> ids() const { return ids_; }

  bool operator==(const EntitySet&) const = default;

 private:
  std::vector<EntityId> ids_;
};

EntitySet intersect(const EntitySet& a, const EntitySet& b);
EntitySet unite(const EntitySet& a, const EntitySet& b);
// candidates \ exclude
EntitySet relative_complement(const EntitySet& candidates,
                              const EntitySet& exclude);

// Union of out_neighbors(e, r) over e in from.
EntitySet project(const KnowledgeGraph& g, const EntitySet& from,
                  RelationRef r);

}  // namespace kgsynth
