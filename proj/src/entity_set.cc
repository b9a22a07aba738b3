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

#include "kgsynth/entity_set.h"

#include <algorithm>
#include <iterator>

namespace kgsynth {

EntitySet::EntitySet(std::initializer_list<EntityId> ids)
    : EntitySet(from_unsorted(std::vector<EntityId>(ids))) {}

EntitySet EntitySet::from_unsorted(std::vector<EntityId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  EntitySet s;
  s.ids_ = std::move(ids);
  return s;
}

EntitySet EntitySet::from_sorted(std::span<const EntityId> ids) {
  EntitySet s;
  s.ids_.assign(ids.begin(), ids.end());
  return s;
}

bool EntitySet::contains(EntityId e) const {
  return std::binary_search(ids_.begin(), ids_.end(), e);
}

EntitySet intersect(const EntitySet& a, const EntitySet& b) {
  std::vector<EntityId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return EntitySet::from_sorted(out);
}

EntitySet unite(const EntitySet& a, const EntitySet& b) {
  std::vector<EntityId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return EntitySet::from_sorted(out);
}

EntitySet relative_complement(const EntitySet& candidates,
                              const EntitySet& exclude) {
  std::vector<EntityId> out;
  std::set_difference(candidates.begin(), candidates.end(), exclude.begin(),
                      exclude.end(), std::back_inserter(out));
  return EntitySet::from_sorted(out);
}

EntitySet project(const KnowledgeGraph& g, const EntitySet& from,
                  RelationRef r) {
  if (from.size() == 1) {
    return EntitySet::from_sorted(g.out_neighbors(*from.begin(), r));
  }
  std::vector<EntityId> out;
  for (EntityId e : from) {
    auto next = g.out_neighbors(e, r);
    out.insert(out.end(), next.begin(), next.end());
  }
  return EntitySet::from_unsorted(std::move(out));
}

}  // namespace kgsynth
